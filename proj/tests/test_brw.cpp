#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rwlab/ball.hpp"
#include "rwlab/brw.hpp"
#include "rwlab/green.hpp"

using namespace rwlab;

namespace {

const CayleyBall& surf5() {
    static auto ball = ball_enumerate(GroupPresentation::surface_group(2), 5);
    return ball;
}

const CayleyBall& tree8() {
    static auto ball = ball_enumerate(GroupPresentation::free_group(1), 8);
    return ball;
}

constexpr double kRhoSurf = 0.6701996556;
constexpr double kRHat = 1.4920;  // certified edge of the fitted convergence radius

const GreenField& field_rhat() {
    static auto f = green_field(surf5(), kRHat, 400, kRhoSurf);
    return f;
}

double eta_of(const GreenField& f) {
    double s = 0;
    for (double v : f.values) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("degenerate offspring mean leaves only the ancestor") {
    BRWConfig cfg{0.0, 5, 1000, 50, 1};
    auto t = simulate_brw(cfg, surf5());
    CHECK(t.mean[0] == 1.0);
    CHECK(t.se[0] == 0.0);
    for (std::size_t i = 1; i < t.mean.size(); ++i) CHECK(t.mean[i] == 0.0);
    CHECK(t.generation_mean[0] == 1.0);
    CHECK(t.generation_mean[1] == 0.0);
    CHECK_FALSE(t.truncated);
}

TEST_CASE("generation sizes grow like powers of the offspring mean") {
    // Horizon below the ball radius, so no particle is ever absorbed and the
    // brood counts are a clean branching process.
    BRWConfig cfg{0.9, 6, 10'000'000, 10000, 3};
    auto t = simulate_brw(cfg, tree8());
    CHECK(t.generation_mean[0] == 1.0);
    for (int n = 1; n <= 6; ++n) {
        double target = std::pow(0.9, n);
        CHECK(t.generation_se[n] > 0);
        CHECK(std::abs(t.generation_mean[n] - target) < 3 * t.generation_se[n]);
    }
}

TEST_CASE("expected visits match the Green field at the same truncation") {
    auto field = green_field(surf5(), 1.0, 20, kRhoSurf);
    BRWConfig cfg{1.0, 20, 10'000'000, 20000, 7};
    auto t = simulate_brw(cfg, surf5());
    CHECK(t.se[0] > 0);
    CHECK(std::abs(t.mean[0] - field.origin()) < 3 * t.se[0]);
    for (std::uint32_t s = 1; s <= 8; ++s)
        CHECK(std::abs(t.mean[s] - field.values[s]) < 3 * t.se[s]);
    CHECK_FALSE(t.truncated);
}

TEST_CASE("particle cap trips the truncation flag") {
    BRWConfig cfg{3.0, 12, 2000, 20, 5};
    auto t = simulate_brw(cfg, tree8());
    CHECK(t.truncated);
    CHECK(t.truncated_runs > 0);
    CHECK(t.truncated_generation > 0);
    CHECK(t.truncated_generation <= 12);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(simulate_brw(BRWConfig{-1.0, 5, 10, 10, 1}, surf5()), std::invalid_argument);
    CHECK_THROWS_AS(simulate_brw(BRWConfig{1.0, 5, 0, 10, 1}, surf5()), std::invalid_argument);
    CHECK_THROWS_AS(simulate_brw(BRWConfig{1.0, 5, 10, 0, 1}, surf5()), std::invalid_argument);
    ColoredBRWConfig bad{1.0, -0.1, 2, 5, 10, 10, 1};
    CHECK_THROWS_AS(colored_vk_mc(bad, surf5()), std::invalid_argument);
    CHECK_THROWS_AS(colored_vk_exact(-0.1, 2, surf5(), field_rhat()), std::invalid_argument);
    CHECK_THROWS_AS(snapback_ratios(-0.1, 3, surf5(), field_rhat()), std::invalid_argument);
}

TEST_CASE("color zero is the Green field and color one is the eta sum") {
    const auto& f = field_rhat();
    auto ex = colored_vk_exact(0.05, 2, surf5(), f);
    REQUIRE(ex.vk.size() == 3);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(ex.vk[0][i] == f.values[i]);
    double eta = eta_of(f);
    CHECK(ex.vk[1][0] == doctest::Approx(0.05 * eta).epsilon(1e-9));
    CHECK(ex.vk[2][0] > 0);
}

TEST_CASE("zero increment kills every color past zero") {
    const auto& f = field_rhat();
    auto ex = colored_vk_exact(0.0, 3, surf5(), f);
    for (int k = 1; k <= 3; ++k)
        for (double v : ex.vk[k]) CHECK(v == 0.0);
}

TEST_CASE("certificate growth bounds the usable color range") {
    auto f = green_field(surf5(), 0.7, 300, kRhoSurf);
    auto ex = colored_vk_exact(0.05, 6, surf5(), f);
    for (int k = 1; k <= 6; ++k)
        CHECK(ex.cert_origin[k] / ex.vk[k][0] > ex.cert_origin[k - 1] / ex.vk[k - 1][0]);
    CHECK(ex.usable_k >= 2);
    CHECK(ex.usable_k < 6);

    // Near the convergence edge the truncation allowance swamps the values
    // from the start: nothing is certifiable, only reportable.
    auto near = colored_vk_exact(0.05, 2, surf5(), field_rhat());
    CHECK(near.usable_k == -1);
}

TEST_CASE("colored Monte Carlo agrees with the truncated convolutions") {
    const auto& f = field_rhat();
    auto ex = colored_vk_exact(0.05, 2, surf5(), f);
    ColoredBRWConfig cfg{kRHat, 0.05, 2, 400, 10'000'000, 40000, 11};
    auto t = colored_vk_mc(cfg, surf5());
    for (int k = 0; k <= 2; ++k) {
        CHECK(t.se[k][0] > 0);
        CHECK(std::abs(t.mean[k][0] - ex.vk[k][0]) < 3 * t.se[k][0]);
        for (std::uint32_t s = 1; s <= 4; ++s)
            CHECK(std::abs(t.mean[k][s] - ex.vk[k][s]) < 3 * t.se[k][s]);
    }
    CHECK(t.origin_partial_sums[0] < t.origin_partial_sums[1]);
    CHECK(t.origin_partial_sums[1] < t.origin_partial_sums[2]);
    CHECK_FALSE(t.truncated);
}

TEST_CASE("pioneer births run at eps times the parent-color visits") {
    const auto& f = field_rhat();
    auto ex = colored_vk_exact(0.05, 2, surf5(), f);
    ColoredBRWConfig cfg{kRHat, 0.05, 2, 400, 10'000'000, 40000, 11};
    auto t = colored_vk_mc(cfg, surf5());
    for (int k = 1; k <= 2; ++k)
        for (std::uint32_t s : {0u, 1u, 3u}) {
            double target = 0.05 * ex.vk[k - 1][s];
            CHECK(t.pioneer_se[k][s] > 0);
            CHECK(std::abs(t.pioneer_mean[k][s] - target) < 3 * t.pioneer_se[k][s]);
        }
}

TEST_CASE("no pioneers without the increment") {
    ColoredBRWConfig cfg{1.0, 0.0, 2, 50, 1'000'000, 2000, 3};
    auto t = colored_vk_mc(cfg, surf5());
    for (int k = 1; k <= 2; ++k)
        for (std::size_t i = 0; i < t.mean[k].size(); ++i) {
            CHECK(t.mean[k][i] == 0.0);
            CHECK(t.pioneer_mean[k][i] == 0.0);
        }
}

TEST_CASE("identical seeds reproduce tallies exactly") {
    ColoredBRWConfig cfg{1.3, 0.1, 2, 100, 1'000'000, 500, 42};
    auto a = colored_vk_mc(cfg, surf5());
    auto b = colored_vk_mc(cfg, surf5());
    for (int k = 0; k <= 2; ++k) {
        CHECK(a.mean[k] == b.mean[k]);
        CHECK(a.pioneer_mean[k] == b.pioneer_mean[k]);
    }
    cfg.seed = 43;
    auto c = colored_vk_mc(cfg, surf5());
    CHECK(a.mean[0] != c.mean[0]);
}

TEST_CASE("snapback base sum and monotonicity in the weight") {
    const auto& f = field_rhat();
    auto base = snapback_ratios(0.0, 1, surf5(), f);
    CHECK(base.H[0] == doctest::Approx(eta_of(f)).epsilon(1e-12));
    double prev = 0;
    for (double d : {0.0, 0.005, 0.01, 0.02, 0.05}) {
        double h = snapback_ratios(d, 1, surf5(), f).H[0];
        CHECK(h > prev);
        CHECK(std::isfinite(h));
        prev = h;
    }
}

TEST_CASE("snapback ratios stabilize") {
    auto sb = snapback_ratios(0.01, 6, surf5(), field_rhat());
    REQUIRE(sb.ratios.size() == 5);
    double last = sb.ratios.back();
    for (double r : sb.ratios) {
        CHECK(r > 0);
        CHECK(std::abs(r - last) < 0.2 * last);
    }
}

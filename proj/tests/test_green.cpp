#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwlab/geometry.hpp"
#include "rwlab/green.hpp"

using namespace rwlab;

namespace {

const CayleyBall& surf5() {
    static auto ball = ball_enumerate(GroupPresentation::surface_group(2), 5);
    return ball;
}

const CayleyBall& tree10() {
    static auto ball = ball_enumerate(GroupPresentation::free_group(1), 10);
    return ball;
}

const SpectralRadiusEstimate& surf_spectral() {
    static auto est = [] {
        auto ball = ball_enumerate(GroupPresentation::surface_group(2), 8);
        return spectral_radius(ball);
    }();
    return est;
}

double rho_surf() { return 1.0 / surf_spectral().lower; }

}  // namespace

TEST_CASE("step distribution validation") {
    auto pres = GroupPresentation::surface_group(2);
    auto u = StepDistribution::uniform(pres);
    u.validate(pres);
    auto bad = u;
    bad.p[0] = 0.3;
    CHECK_THROWS_AS(bad.validate(pres), std::invalid_argument);
    bad = u;
    bad.p[0] += 0.1;
    bad.p[1] += 0.1;
    CHECK_THROWS_AS(bad.validate(pres), std::invalid_argument);
}

TEST_CASE("green field degenerate cases") {
    const auto& ball = surf5();
    auto f0 = green_field(ball, 0.0, 50, 0.9);
    CHECK(f0.origin() == 1.0);
    for (std::uint32_t i = 1; i < ball.size(); ++i) CHECK(f0.values[i] == 0.0);

    // one-step coefficient at a generator is p = 1/8
    double r = 1e-6;
    auto f1 = green_field(ball, r, 50, 0.9);
    Packed a1 = canonical_form(ball.pres, {0});
    CHECK(f1.value_at(a1) / r == doctest::Approx(1.0 / 8).epsilon(1e-6));
}

TEST_CASE("free-group engine reproduces the closed forms") {
    const auto& ball = tree10();
    double rho = std::sqrt(3.0) / 2.0;  // exact for the 4-regular tree
    auto f = green_field(ball, 1.0, 200, rho);
    auto oracle = covering_oracle(1.0L, 1);
    CHECK(std::fabs(f.origin() - (double)oracle.G) <= f.certificate(0));

    // radial chain: far tighter than the ball certificate
    auto radial = tree_green_radial(1, 1.0, 2000, 10);
    CHECK(radial[0] == doctest::Approx((double)oracle.G).epsilon(1e-12));
    for (int d = 1; d <= 10; ++d)
        CHECK(radial[d] ==
              doctest::Approx((double)(oracle.G * std::pow(oracle.F, (long double)d)))
                  .epsilon(1e-12));

    // engine first passage vs F^|x|
    Packed x = canonical_form(ball.pres, {0, 2});
    double F2 = first_passage(f, kEmptyWord, x);
    CHECK(std::fabs(F2 - (double)(oracle.F * oracle.F)) < 1e-4);
}

TEST_CASE("monotone truncation and two-horizon certificate validity") {
    const auto& pres = GroupPresentation::surface_group(2);
    auto ball4 = ball_enumerate(pres, 4);
    const auto& ball6 = surf5();
    double rho = rho_surf();
    for (double r : {0.6, 1.0}) {
        auto coarse = green_field(ball4, r, 40, rho);
        auto fine = green_field(ball6, r, 80, rho);
        CHECK(coarse.origin() <= fine.origin() + 1e-15);
        CHECK(std::fabs(fine.origin() - coarse.origin()) <= coarse.certificate(0));
        Packed a1 = canonical_form(pres, {0});
        CHECK(std::fabs(fine.value_at(a1) - coarse.value_at(a1)) <=
              coarse.certificate_at(a1));
    }
}

TEST_CASE("symmetry of the field under generator relabeling") {
    const auto& ball = surf5();
    auto f = green_field(ball, 1.0, 120, rho_surf());
    double ref = f.value_at(canonical_form(ball.pres, {0}));
    for (int l = 1; l < 8; ++l)
        CHECK(f.value_at(canonical_form(ball.pres, {Letter(l)})) ==
              doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("sphere sums dominate r^m") {
    const auto& ball = surf5();
    double r = 1.0;
    auto f = green_field(ball, r, 150, rho_surf());
    for (int m = 0; m <= ball.radius; ++m) {
        double s = 0;
        for (std::uint64_t i = ball.sphere_off[m]; i < ball.sphere_off[m + 1]; ++i)
            s += f.values[i];
        CHECK(s + f.certificate(std::uint32_t(ball.sphere_off[m])) * (double)(
                  ball.sphere_off[m + 1] - ball.sphere_off[m]) >=
              std::pow(r, m) * (1 - 1e-12));
    }
}

TEST_CASE("restricted green specializations") {
    const auto& ball = surf5();
    const auto& pres = ball.pres;
    Packed y = canonical_form(pres, {0, 2});  // distance 2: not adjacent to 1
    CHECK(restricted_green(ball, 1.0, 60, kEmptyWord, y, [](Packed) { return false; }) == 0.0);

    auto f = green_field(ball, 1.0, 60, rho_surf());
    double unrestricted =
        restricted_green(ball, 1.0, 60, kEmptyWord, y, [](Packed) { return true; });
    CHECK(unrestricted == doctest::Approx(f.value_at(y)).epsilon(1e-12));

    // first passage via the taboo set "everything but y"
    Packed a1 = canonical_form(pres, {0});
    double taboo =
        restricted_green(ball, 1.0, 200, kEmptyWord, a1, [&](Packed w) { return w != a1; });
    double hom = first_passage(f, kEmptyWord, a1);
    CHECK(std::fabs(taboo - hom) < 5e-3);  // ball truncation differs between the two routes
}

TEST_CASE("avoidance agrees with exhaustive short-path enumeration") {
    const auto& ball = surf5();
    const auto& pres = ball.pres;
    Packed x = canonical_form(pres, {0});
    double r = 1.0;

    double brute = 0;
    // all paths 1 -> 1 of length <= 8 avoiding 1 and x in their interior
    auto dfs = [&](auto&& self, std::uint32_t v, int n, double w) -> void {
        if (n > 0 && v == 0) brute += w;
        if (n == 8) return;
        if (n > 0 && (v == 0 || ball.element(v) == x)) return;
        for (int l = 0; l < 8; ++l) {
            std::uint32_t nv = ball.neighbor(v, Letter(l));
            if (nv != CayleyBall::kNoNeighbor) self(self, nv, n + 1, w * r / 8.0);
        }
    };
    dfs(dfs, 0, 0, 1.0);
    CHECK(avoidance(ball, r, 8, x) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(avoidance(ball, r, 200, x) < 1.0);
    CHECK_THROWS_AS(avoidance(ball, r, 10, kEmptyWord), std::invalid_argument);
}

TEST_CASE("renewal residual") {
    auto f0 = green_field(surf5(), 0.0, 10, 0.9);
    CHECK(renewal_residual(f0) == 0.0);

    // free presentation via the radial chain: residual from horizon only
    auto radial = tree_green_radial(1, 1.0, 400, 1);
    double resid = std::fabs(radial[0] - 4 * (1.0 / 4) * 1.0 * radial[1] - 1.0);
    CHECK(resid < 1e-8);

    auto f = green_field(surf5(), 1.2, 150, rho_surf());
    CHECK(renewal_residual(f) <= 9 * f.certificate(0) + 1e-12);
}

TEST_CASE("certified spectral bound on the tree is tight") {
    double rho = certified_rho_upper(tree10(), 2);
    CHECK(rho == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-7));
    CHECK(rho >= std::sqrt(3.0) / 2.0 - 1e-12);
}

TEST_CASE("spectral radius estimate brackets") {
    auto est_free = spectral_radius(tree10());
    double Rt = 2.0 / std::sqrt(3.0);
    CHECK(est_free.lower <= Rt * (1 + 1e-9));
    CHECK(est_free.upper >= Rt * (1 - 1e-9));
    CHECK(est_free.lower == doctest::Approx(Rt).epsilon(1e-6));
    CHECK(est_free.estimate == doctest::Approx(Rt).epsilon(1e-2));
    CHECK(est_free.zuk_gate);  // g = 1: R > 1

    const auto& est = surf_spectral();
    CHECK(est.lower <= est.estimate);
    CHECK(est.estimate <= est.upper);
    CHECK(est.upper <= est.covering_upper + 1e-12);
    CHECK(est.lower > std::sqrt(2.0));
    CHECK(est.zuk_gate);
    CHECK((est.upper - est.lower) / est.estimate < 0.02);
    CHECK(est.p2n[1] == doctest::Approx(1.0 / 8).epsilon(1e-12));

    // a small ball cannot stabilize the pattern table
    CHECK_THROWS_AS(certified_rho_upper(surf5(), 2), PatternError);
}

TEST_CASE("ancona ratios on the tree collapse to 1/G") {
    const auto& ball = tree10();
    auto scan = ancona_scan(ball, {0.8, 1.0}, 300, std::sqrt(3.0) / 2.0, 40, 11);
    for (std::size_t i = 0; i < scan.r_grid.size(); ++i) {
        double G = (double)covering_oracle(scan.r_grid[i], 1).G;
        CHECK(scan.c_hat[i] == doctest::Approx(1.0 / G).epsilon(1e-3));
    }
}

TEST_CASE("inequality suite margins") {
    const auto& ball = surf5();
    auto rep = inequality_suite(ball, 1.0, 150, rho_surf(), 5);
    CHECK(rep.all_within_certificate);
    CHECK(rep.supermult_min_margin >= -3 * rep.certificate);
    CHECK(rep.harnack_C >= 1.0);
    for (double m : rep.renewal_margin) CHECK(m >= -3 * rep.certificate);

    // retracing is an identity on the tree
    auto rep_tree = inequality_suite(tree10(), 1.0, 250, std::sqrt(3.0) / 2.0, 5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(rep_tree.retracing_margin[i]) < 1e-4);
}

TEST_CASE("derivative identity") {
    double rel = derivative_identity_check(surf5(), 1.0, 150, rho_surf(), 1e-4);
    CHECK(rel < 1e-2);
    CHECK_THROWS_AS(derivative_identity_check(surf5(), 1.0, 50, rho_surf(), 2.0),
                    std::invalid_argument);
}

TEST_CASE("eta exponent fit on the surface group") {
    auto est = spectral_radius(surf5());
    std::vector<double> grid;
    for (int k = 2; k <= 8; ++k) grid.push_back(std::pow(10.0, -k / 2.0));
    auto fit = eta_and_exponent(surf5(), est.estimate, grid, 250, rho_surf());
    CHECK(fit.delta.size() == grid.size());
    // truncated ball: eta saturates instead of diverging, so the slope is a
    // coarse -1/2 here; the acceptance run uses a much larger ball
    CHECK(fit.slope_plain < 0.0);
    CHECK_THROWS_AS(eta_and_exponent(surf5(), est.estimate, {1e-3, 2e-3}, 50, rho_surf()),
                    std::invalid_argument);
}

#include "rwlab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rwlab/fit.hpp"
#include "rwlab/oracle.hpp"

namespace rwlab {

namespace {

double fit_geometric_rate(const std::vector<double>& seq) {
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < seq.size(); ++n) {
        if (seq[n] > 1e-14) {
            xs.push_back((double)n);
            ys.push_back(std::log(seq[n]));
        }
    }
    if (xs.size() < 2) return 0.0;
    return std::exp(ols(xs, ys).slope);
}

}  // namespace

CocycleApprox cocycle(const GreenField& field, const GeodesicAutomaton& aut, int n_paths,
                      int max_order, std::uint64_t seed) {
    const CayleyBall& ball = *field.ball;
    const GroupPresentation& pres = aut.pres;
    CocycleApprox out;
    out.r = field.r;
    out.max_order = std::min(max_order, ball.radius - 1);
    if (out.max_order < 0) throw std::invalid_argument("cocycle: ball too small");

    std::mt19937_64 rng(seed);
    out.usable_order = out.max_order;
    for (int k = 0; k < n_paths; ++k) {
        // Random automaton path of max_order + 1 edges from a random
        // non-start state; its letters spell a geodesic word.
        int s = 1 + (int)(rng() % (aut.n_states - 1));
        Word w;
        for (int step = 0; step <= out.max_order; ++step) {
            const auto& e = aut.edges[s];
            auto [l, t] = e[rng() % e.size()];
            w.push_back(l);
            s = t;
        }
        std::vector<double> f(out.max_order + 1);
        for (int n = 0; n <= out.max_order; ++n) {
            Word head(w.begin(), w.begin() + n + 1);
            Word tail(w.begin() + 1, w.begin() + n + 1);
            Packed ph = canonical_form(pres, head);
            Packed pt = canonical_form(pres, tail);
            double num = field.value_at(ph), den = field.value_at(pt);
            f[n] = std::log(num / den);
            if (field.certificate_at(ph) > 0.1 * num || field.certificate_at(pt) > 0.1 * den)
                out.usable_order = std::min(out.usable_order, n - 1);
            out.sup_norm = std::max(out.sup_norm, std::abs(f[n]));
        }
        out.f.push_back(std::move(f));
    }
    out.sup_diff.assign(out.max_order, 0.0);
    for (const auto& f : out.f)
        for (int n = 0; n + 1 <= out.max_order; ++n)
            out.sup_diff[n] = std::max(out.sup_diff[n], std::abs(f[n + 1] - f[n]));
    out.decay_rate = fit_geometric_rate(out.sup_diff);
    return out;
}

PressureEstimate pressure(const GreenField& field, double theta, int m_lo, int m_hi) {
    const CayleyBall& ball = *field.ball;
    if (m_hi <= 0) m_hi = ball.radius;
    if (m_hi > ball.radius || m_lo < 0 || m_hi - m_lo < 2)
        throw std::invalid_argument("pressure: fit window needs at least three spheres");

    PressureEstimate est;
    est.theta = theta;
    est.r = field.r;
    est.m_lo = m_lo;
    est.m_hi = m_hi;
    for (int m = 0; m <= m_hi; ++m) {
        double sum = 0;
        for (std::uint64_t i = ball.sphere_off[m]; i < ball.sphere_off[m + 1]; ++i)
            sum += std::pow(field.values[i], theta);
        est.log_sums.push_back(std::log(sum));
    }
    std::vector<double> xs, ys;
    for (int m = m_lo; m <= m_hi; ++m) {
        xs.push_back((double)m);
        ys.push_back(est.log_sums[m]);
    }
    auto fit = ols(xs, ys);
    est.slope = fit.slope;
    est.intercept = fit.intercept;
    est.residual = fit.rms_residual;
    return est;
}

double covering_pressure_slope(int g, double r, double theta) {
    auto v = covering_oracle(r, g);
    return std::log(4.0 * g - 1.0) + theta * std::log(v.F);
}

LevelSetCount level_set_count(const GreenField& field, const std::vector<double>& eps_grid) {
    const CayleyBall& ball = *field.ball;
    LevelSetCount out;
    out.eps = eps_grid;
    std::sort(out.eps.rbegin(), out.eps.rend());

    // Truncation floor: below it, elements outside the ball could also
    // cross the level, so counts there are not trustworthy.  For certified
    // fields, G(1,x) <= (rho r)^{|x|} / (1 - rho r) bounds every excluded
    // element; otherwise the boundary maximum stands in heuristically.
    for (std::uint64_t i = ball.sphere_off[ball.radius]; i < ball.sphere_off[ball.radius + 1];
         ++i)
        out.floor = std::max(out.floor, field.values[i]);
    double rr = field.rho_upper * field.r;
    if (field.certified)
        out.floor = std::max(out.floor, std::pow(rr, ball.radius + 1) / (1.0 - rr));

    std::vector<double> xs, ys;
    for (double eps : out.eps) {
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < ball.size(); ++i)
            if (field.values[i] >= eps) ++count;
        out.counts.push_back(count);
        bool ok = eps > out.floor && count > 0;
        out.usable.push_back(ok);
        if (ok) {
            xs.push_back(std::log(eps));
            ys.push_back(std::log((double)count));
        }
    }
    if (xs.size() >= 2) {
        auto fit = ols(xs, ys);
        out.slope = fit.slope;
        out.residual = fit.rms_residual;
    }
    return out;
}

MartinKernelFit martin_kernel(const GreenField& field, Packed x, const std::vector<Packed>& ray) {
    const CayleyBall& ball = *field.ball;
    const GroupPresentation& pres = ball.pres;
    MartinKernelFit out;
    out.x = x;
    Packed xinv = inverse_packed(pres, x);
    for (Packed y : ray) {
        if (ball.index_of(y) == CayleyBall::kNoNeighbor) break;
        Packed xy = multiply(pres, xinv, y);
        if (ball.index_of(xy) == CayleyBall::kNoNeighbor) break;
        out.ratios.push_back(field.value_at(xy) / field.value_at(y));
    }
    out.usable = (int)out.ratios.size();
    if (out.usable > 0) out.limit = out.ratios.back();
    std::vector<double> diffs;
    for (int n = 0; n + 1 < out.usable; ++n)
        diffs.push_back(std::abs(out.ratios[n + 1] - out.ratios[n]));
    out.rate = fit_geometric_rate(diffs);
    return out;
}

std::vector<Packed> automaton_ray(const GeodesicAutomaton& aut, int length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Packed> ray;
    int s = 0;
    Packed w = kEmptyWord;
    for (int n = 0; n < length; ++n) {
        const auto& e = aut.edges[s];
        auto [l, t] = e[seed ? rng() % e.size() : 0];
        w = (w << aut.pres.bits) | l;
        s = t;
        ray.push_back(w);
    }
    return ray;
}

ErgodicAverageReport geodesic_average_stability(const GreenField& field,
                                                const std::vector<int>& ms, int samples,
                                                std::uint64_t seed) {
    const CayleyBall& ball = *field.ball;
    const GroupPresentation& pres = ball.pres;
    ErgodicAverageReport rep;
    rep.ms = ms;
    rep.samples = samples;
    rep.seed = seed;
    std::mt19937_64 rng(seed);

    for (int m : ms) {
        if (m < 1 || m > ball.radius)
            throw std::invalid_argument("geodesic_average_stability: sphere out of range");
        std::uint64_t lo = ball.sphere_off[m], hi = ball.sphere_off[m + 1];
        std::vector<double> weights(hi - lo);
        for (std::uint64_t i = lo; i < hi; ++i)
            weights[i - lo] = field.values[i] * field.values[i];
        std::discrete_distribution<std::uint64_t> pick(weights.begin(), weights.end());

        std::vector<double> avgs;
        for (int k = 0; k < samples; ++k) {
            std::uint64_t xi = lo + pick(rng);
            Packed x = ball.elements[xi];
            Packed xinv = inverse_packed(pres, x);
            double acc = 0;
            for (std::uint64_t yi = 0; yi < ball.size(); ++yi) {
                Packed z = multiply(pres, xinv, ball.elements[yi]);
                std::uint32_t zi = ball.index_of(z);
                if (zi == CayleyBall::kNoNeighbor) continue;
                acc += field.values[yi] * field.values[zi];
            }
            avgs.push_back(acc / (m * field.values[xi]));
        }
        std::sort(avgs.begin(), avgs.end());
        double med = avgs[avgs.size() / 2];
        double iqr = avgs[(3 * avgs.size()) / 4] - avgs[avgs.size() / 4];
        rep.median.push_back(med);
        rep.dispersion.push_back(iqr / med);
        rep.averages.push_back(std::move(avgs));
    }
    if (!rep.median.empty()) rep.stabilized_mean = rep.median.back();
    return rep;
}

}  // namespace rwlab

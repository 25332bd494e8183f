#include "rwlab/green.hpp"

#include "rwlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace rwlab {

namespace {

constexpr double kDivergenceCap = 1e12;

double pow_int(double b, int e) {
    double out = 1;
    for (int i = 0; i < e; ++i) out *= b;
    return out;
}

// v[i] = sum_l p_l u[i * l]; mass stepping outside the ball is dropped.
// Symmetry of the step law makes the gather form equal to the scatter form.
double sweep(const CayleyBall& ball, const StepDistribution& step, const std::vector<double>& u,
             std::vector<double>& v) {
    const int L = ball.n_letters();
    const std::uint32_t* adj = ball.adj.data();
    double total = 0;
    for (std::uint64_t i = 0; i < ball.size(); ++i) {
        double s = 0;
        const std::uint32_t* row = adj + i * L;
        for (int l = 0; l < L; ++l)
            if (row[l] != CayleyBall::kNoNeighbor) s += step.p[l] * u[row[l]];
        v[i] = s;
        total += s;
    }
    return total;
}

}  // namespace

StepDistribution StepDistribution::uniform(const GroupPresentation& pres) {
    StepDistribution s;
    s.p.assign(pres.n_letters(), 1.0 / pres.n_letters());
    return s;
}

void StepDistribution::validate(const GroupPresentation& pres) const {
    if ((int)p.size() != pres.n_letters())
        throw std::invalid_argument("StepDistribution: wrong support size");
    double sum = 0;
    for (int l = 0; l < pres.n_letters(); ++l) {
        if (p[l] <= 0) throw std::invalid_argument("StepDistribution: probabilities must be > 0");
        if (std::fabs(p[l] - p[inverse_letter(Letter(l))]) > 1e-15)
            throw std::invalid_argument("StepDistribution: must be symmetric under inversion");
        sum += p[l];
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("StepDistribution: must sum to 1");
}

double GreenField::value_at(Packed x) const {
    std::uint32_t i = ball->index_of(x);
    if (i == CayleyBall::kNoNeighbor)
        throw std::invalid_argument("GreenField::value_at: element outside ball");
    return values[i];
}

double GreenField::certificate(std::uint32_t idx) const {
    if (!certified) return std::numeric_limits<double>::infinity();
    double rr = r * rho_upper;
    int dist = std::max(0, ball->radius + 1 - ball->sphere_of(idx));
    return tail_bound + leak_weighted * pow_int(rr, dist) / (1 - rr);
}

double GreenField::certificate_at(Packed x) const {
    std::uint32_t i = ball->index_of(x);
    if (i == CayleyBall::kNoNeighbor)
        throw std::invalid_argument("GreenField::certificate_at: element outside ball");
    return certificate(i);
}

GreenField green_field(const CayleyBall& ball, double r, int horizon, double rho_upper,
                       std::uint32_t x0, const StepDistribution* step) {
    if (r < 0 || horizon < 0) throw std::invalid_argument("green_field: bad r or horizon");
    if (rho_upper <= 0 || rho_upper > 1)
        throw std::invalid_argument("green_field: rho_upper must lie in (0, 1]");
    StepDistribution s = step ? *step : StepDistribution::uniform(ball.pres);
    s.validate(ball.pres);

    GreenField f;
    f.r = r;
    f.ball = &ball;
    f.x0 = x0;
    f.horizon = horizon;
    f.rho_upper = rho_upper;
    f.certified = r * rho_upper < 1;
    double rr = r * rho_upper;
    f.tail_bound = f.certified ? pow_int(rr, horizon + 1) / (1 - rr)
                               : std::numeric_limits<double>::infinity();

    f.values.assign(ball.size(), 0.0);
    std::vector<double> u(ball.size(), 0.0), v(ball.size(), 0.0);
    u[x0] = 1.0;
    f.values[x0] = 1.0;
    double rn = 1.0, mass = 1.0;
    for (int n = 1; n <= horizon; ++n) {
        double kept = sweep(ball, s, u, v);
        std::swap(u, v);
        rn *= r;
        f.leak_weighted += (mass - kept) * rn;
        mass = kept;
        double layer_total = 0;
        for (std::uint64_t i = 0; i < ball.size(); ++i) {
            f.values[i] += rn * u[i];
            layer_total += f.values[i];
        }
        if (layer_total > kDivergenceCap)
            throw std::domain_error("green_field: partial sums diverge (r beyond spectral bound)");
        if (mass == 0.0) break;
    }
    return f;
}

double first_passage(const GreenField& field, Packed x, Packed y) {
    const GroupPresentation& pres = field.ball->pres;
    if (field.x0 != 0)
        throw std::invalid_argument("first_passage: field must be centered at the identity");
    Packed d = multiply(pres, inverse_packed(pres, x), y);
    return field.value_at(d) / field.origin();
}

double restricted_green(const CayleyBall& ball, double r, int horizon, Packed x, Packed y,
                        const std::function<bool(Packed)>& omega, const StepDistribution* step) {
    StepDistribution s = step ? *step : StepDistribution::uniform(ball.pres);
    s.validate(ball.pres);
    std::uint32_t xi = ball.index_of(x), yi = ball.index_of(y);
    if (xi == CayleyBall::kNoNeighbor || yi == CayleyBall::kNoNeighbor)
        throw std::invalid_argument("restricted_green: endpoint outside ball");

    std::vector<char> allowed(ball.size());
    for (std::uint64_t i = 0; i < ball.size(); ++i) allowed[i] = omega(ball.element(i)) ? 1 : 0;

    double out = (xi == yi) ? 1.0 : 0.0;
    std::vector<double> u(ball.size(), 0.0), v(ball.size(), 0.0);
    u[xi] = 1.0;
    double rn = 1.0;
    for (int n = 1; n <= horizon; ++n) {
        sweep(ball, s, u, v);
        std::swap(u, v);
        rn *= r;
        out += rn * u[yi];
        if (out > kDivergenceCap)
            throw std::domain_error("restricted_green: partial sums diverge");
        double mass = 0;
        for (std::uint64_t i = 0; i < ball.size(); ++i) {
            if (!allowed[i]) u[i] = 0.0;
            mass += u[i];
        }
        if (mass == 0.0) break;
    }
    return out;
}

double avoidance(const CayleyBall& ball, double r, int horizon, Packed x,
                 const StepDistribution* step) {
    if (x == kEmptyWord) throw std::invalid_argument("avoidance: x must differ from the identity");
    auto omega = [x](Packed w) { return w != kEmptyWord && w != x; };
    return restricted_green(ball, r, horizon, kEmptyWord, kEmptyWord, omega, step) - 1.0;
}

double renewal_residual(const GreenField& field) {
    const CayleyBall& ball = *field.ball;
    StepDistribution s = StepDistribution::uniform(ball.pres);
    double acc = 0;
    for (int l = 0; l < ball.n_letters(); ++l) {
        std::uint32_t i = ball.neighbor(field.x0, Letter(l));
        acc += s.p[l] * field.r * field.values[i];
    }
    return std::fabs(field.origin() - acc - 1.0);
}

std::vector<double> return_series(const CayleyBall& ball, int steps,
                                  const StepDistribution* step) {
    StepDistribution s = step ? *step : StepDistribution::uniform(ball.pres);
    s.validate(ball.pres);
    std::vector<double> u(ball.size(), 0.0), v(ball.size(), 0.0);
    u[0] = 1.0;
    std::vector<double> out{1.0};
    for (int n = 1; n <= steps; ++n) {
        sweep(ball, s, u, v);
        std::swap(u, v);
        out.push_back(u[0]);
    }
    return out;
}

std::vector<double> tree_green_radial(int g, double r, int horizon, int max_dist) {
    if (g < 1 || r < 0 || horizon < 0 || max_dist < 0)
        throw std::invalid_argument("tree_green_radial: bad arguments");
    long double p = 1.0L / (4 * g), q = 1.0L - p;
    std::vector<long double> m(horizon + 2, 0.0L), nm(m.size()), acc(max_dist + 1, 0.0L);
    m[0] = 1.0L;
    acc[0] = 1.0L;
    long double rn = 1.0L;
    for (int n = 1; n <= horizon; ++n) {
        std::fill(nm.begin(), nm.end(), 0.0L);
        nm[1] += m[0];
        for (int k = 1; k + 1 < (int)m.size(); ++k) {
            nm[k - 1] += p * m[k];
            nm[k + 1] += q * m[k];
        }
        std::swap(m, nm);
        rn *= r;
        for (int d = 0; d <= std::min(max_dist, n); ++d) acc[d] += rn * m[d];
    }
    std::vector<double> out(max_dist + 1);
    out[0] = (double)acc[0];
    long double nd = 4.0L * g;
    for (int d = 1; d <= max_dist; ++d) {
        out[d] = (double)(acc[d] / nd);
        nd *= 4 * g - 1;
    }
    return out;
}

namespace {

struct PatternTable {
    int n_types = 0;
    // Per type, the set of observed neighbour rows; row[l] = {delta, target}.
    // One type can show several rows (the type does not see deep enough to
    // pin down the context after a downward step), so the subinvariance
    // bound maximizes over variants.
    std::vector<std::vector<std::vector<std::pair<int, int>>>> transitions;
};

// Types are local distance patterns: for every group element v with |v| <= k
// the increment |xv| - |x|.  Collected on elements with |x| <= M - k, with
// transition rows from elements with |x| <= M - k - 1.
PatternTable build_patterns(const CayleyBall& ball, int k) {
    const int L = ball.n_letters();
    const int M = ball.radius;
    if (M < k + 2) throw PatternError("certified_rho_upper: ball too small for pattern radius");

    // probe words: canonical letters of all elements with 1 <= |v| <= k
    std::vector<Word> probes;
    for (std::uint64_t i = 1; i < ball.sphere_off[k + 1]; ++i)
        probes.push_back(unpack_word(ball.element(i), ball.pres.bits));

    std::uint64_t n_colored = ball.sphere_off[M - k + 1];
    std::vector<int> color(n_colored, -1);
    std::map<std::vector<std::int8_t>, int> dict;
    std::vector<std::int8_t> pat(probes.size());
    for (std::uint64_t i = 0; i < n_colored; ++i) {
        int base = ball.sphere_of(std::uint32_t(i));
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            std::uint32_t cur = std::uint32_t(i);
            for (Letter l : probes[pi]) {
                cur = ball.neighbor(cur, l);
                if (cur == CayleyBall::kNoNeighbor)
                    throw PatternError("certified_rho_upper: probe left the ball");
            }
            pat[pi] = std::int8_t(ball.sphere_of(cur) - base);
        }
        auto [it, fresh] = dict.emplace(pat, (int)dict.size());
        color[i] = it->second;
    }

    PatternTable table;
    table.n_types = (int)dict.size();
    table.transitions.assign(table.n_types, {});
    std::uint64_t n_rows = ball.sphere_off[M - k];
    for (std::uint64_t i = 0; i < n_rows; ++i) {
        int t = color[i];
        std::vector<std::pair<int, int>> row(L);
        int base = ball.sphere_of(std::uint32_t(i));
        for (int l = 0; l < L; ++l) {
            std::uint32_t j = ball.neighbor(std::uint32_t(i), Letter(l));
            row[l] = {ball.sphere_of(j) - base, color[j]};
        }
        auto& rows = table.transitions[t];
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(std::move(row));
    }
    for (int t = 0; t < table.n_types; ++t)
        if (table.transitions[t].empty())
            throw PatternError("certified_rho_upper: pattern type seen only near the boundary");
    return table;
}

// max_t (A_s t)_t / t_t after balancing t by power iteration: a pointwise
// certified bound on the Perron value of the weighted transition matrix.
double pattern_beta(const PatternTable& table, const StepDistribution& s, double sw) {
    int n = table.n_types;
    auto apply = [&](const std::vector<double>& t, int a) {
        double worst = 0;
        for (const auto& row : table.transitions[a]) {
            double acc = 0;
            for (std::size_t l = 0; l < row.size(); ++l)
                acc += s.p[l] * std::pow(sw, row[l].first) * t[row[l].second];
            worst = std::max(worst, acc);
        }
        return worst;
    };
    std::vector<double> t(n, 1.0), nt(n);
    for (int it = 0; it < 300; ++it) {
        double norm = 0;
        for (int a = 0; a < n; ++a) {
            nt[a] = apply(t, a);
            norm = std::max(norm, nt[a]);
        }
        for (int a = 0; a < n; ++a) nt[a] = std::max(nt[a] / norm, 1e-14);
        std::swap(t, nt);
    }
    double beta = 0;
    for (int a = 0; a < n; ++a) beta = std::max(beta, apply(t, a) / t[a]);
    return beta;
}

double optimize_beta(const PatternTable& table, const StepDistribution& s) {
    double lo = 0.05, hi = 0.999;
    for (int it = 0; it < 80; ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (pattern_beta(table, s, m1) < pattern_beta(table, s, m2))
            hi = m2;
        else
            lo = m1;
    }
    return pattern_beta(table, s, (lo + hi) / 2);
}

}  // namespace

double certified_rho_upper(const CayleyBall& ball, int pattern_radius,
                           const StepDistribution* step) {
    StepDistribution s = step ? *step : StepDistribution::uniform(ball.pres);
    s.validate(ball.pres);
    return optimize_beta(build_patterns(ball, pattern_radius), s);
}

SpectralRadiusEstimate spectral_radius(const CayleyBall& ball, int max_pattern_radius) {
    if (ball.radius < 4) throw std::invalid_argument("spectral_radius: ball radius must be >= 4");
    SpectralRadiusEstimate est;
    StepDistribution s = StepDistribution::uniform(ball.pres);

    auto probs = return_series(ball, 2 * ball.radius, &s);
    for (int n = 0; 2 * n < (int)probs.size(); ++n) est.p2n.push_back(probs[2 * n]);

    est.subseq_upper = std::numeric_limits<double>::infinity();
    est.ratio_upper = std::numeric_limits<double>::infinity();
    std::vector<double> corrected;
    for (int n = 1; n < (int)est.p2n.size(); ++n)
        est.subseq_upper =
            std::min(est.subseq_upper, std::pow(est.p2n[n], -1.0 / (2.0 * n)));
    for (int n = 1; n + 1 < (int)est.p2n.size(); ++n) {
        double ratio = std::sqrt(est.p2n[n] / est.p2n[n + 1]);
        est.ratio_upper = std::min(est.ratio_upper, ratio);
        corrected.push_back(ratio * std::pow(1.0 + 1.0 / n, -0.75));
    }
    est.covering_upper = (double)covering_R(ball.pres.genus);
    est.upper = std::min({est.subseq_upper, est.ratio_upper, est.covering_upper});

    est.lower = 1.0;  // trivial: the return series is dominated by sum r^n
    for (int k = 2; k <= max_pattern_radius; ++k) {
        try {
            PatternTable table = build_patterns(ball, k);
            est.lower = std::max(est.lower, 1.0 / optimize_beta(table, s));
            est.pattern_radius = k;
            est.n_types = table.n_types;
            break;
        } catch (const PatternError&) {
            if (k == max_pattern_radius) est.pattern_radius = 0;
        }
    }

    est.estimate = corrected.size() >= 3 ? aitken(corrected) : corrected.back();
    est.estimate = std::clamp(est.estimate, est.lower, est.upper);

    // absorbing-ball top eigenvalue: a consistency value, not a bound
    {
        std::vector<double> u(ball.size(), 1.0), v(ball.size());
        double lambda = 0;
        for (int it = 0; it < 60; ++it) {
            double total = sweep(ball, s, u, v);
            double prev = 0;
            for (double x : u) prev += x;
            lambda = total / prev;
            double norm = *std::max_element(v.begin(), v.end());
            for (auto& x : v) x /= norm;
            std::swap(u, v);
        }
        est.dirichlet_value = 1.0 / lambda;
    }

    est.zuk_gate = est.lower > std::sqrt((double)ball.pres.genus);
    if (est.lower > est.upper * (1 + 1e-9))
        throw std::logic_error("spectral_radius: certified bounds crossed");
    return est;
}

AnconaScan ancona_scan(const CayleyBall& ball, const std::vector<double>& r_grid, int horizon,
                       double rho_upper, int samples, std::uint64_t seed) {
    const GroupPresentation& pres = ball.pres;
    AnconaScan scan;
    scan.r_grid = r_grid;
    scan.samples = samples;
    scan.seed = seed;
    for (double r : r_grid) {
        GreenField f = green_field(ball, r, horizon, rho_upper);
        double G = f.origin();
        std::mt19937_64 rng(seed);
        double c_hat = 1.0 / G;  // endpoint split
        std::uint64_t lo = ball.sphere_off[2];
        std::uint64_t hi = ball.sphere_off[std::max(3, ball.radius - 1)];
        for (int t = 0; t < samples; ++t) {
            Packed w = ball.element(std::uint32_t(lo + rng() % (hi - lo)));
            Word letters = unpack_word(w, pres.bits);
            for (int k = 1; k < (int)letters.size(); ++k) {
                Packed u = pack_word(Word(letters.begin(), letters.begin() + k), pres.bits,
                                     pres.max_len);
                Packed rest = multiply(pres, inverse_packed(pres, u), w);
                double ratio = f.value_at(w) / (f.value_at(u) * f.value_at(rest));
                c_hat = std::max(c_hat, ratio);
            }
        }
        scan.c_hat.push_back(c_hat);
    }
    return scan;
}

InequalityReport inequality_suite(const CayleyBall& ball, double r, int horizon, double rho_upper,
                                  std::uint64_t seed) {
    const GroupPresentation& pres = ball.pres;
    StepDistribution s = StepDistribution::uniform(pres);
    GreenField f = green_field(ball, r, horizon, rho_upper, 0, &s);
    double G = f.origin();

    InequalityReport rep;
    rep.r = r;
    rep.certificate = f.certificate(0);

    for (int l = 0; l < pres.n_letters(); ++l)
        rep.probes.push_back(ball.element(ball.neighbor(0, Letter(l))));
    for (std::uint64_t i = ball.sphere_off[2]; i < ball.sphere_off[2] + 2; ++i)
        rep.probes.push_back(ball.element(std::uint32_t(i)));

    auto probs = return_series(ball, 5, &s);

    for (Packed x : rep.probes) {
        int len = packed_len(x, pres.bits);
        double A = avoidance(ball, r, horizon, x, &s);
        double F = f.value_at(x) / G;
        if (len == 1) {
            double px = s.p[unpack_word(x, pres.bits)[0]];
            rep.retracing_margin.push_back(F - px * r / (1.0 - A));
        } else {
            rep.retracing_margin.push_back(F);
        }
        double denom = 1.0 - A - F * F;
        rep.renewal_margin.push_back(denom > 0 ? 1.0 / denom - G
                                               : std::numeric_limits<double>::infinity());
        double prefix = 0, rn = 1;
        for (int n = 0; n < 2 * len; ++n) {
            prefix += probs[n] * rn;
            rn *= r;
        }
        rep.backscatter_margin.push_back((G - prefix) - F * F * G);
    }

    std::mt19937_64 rng(seed);
    std::uint64_t inner = ball.sphere_off[ball.radius / 2 + 1];
    rep.supermult_min_margin = std::numeric_limits<double>::infinity();
    rep.harnack_C = 1.0;
    for (int t = 0; t < 300; ++t) {
        Packed x = ball.element(std::uint32_t(rng() % inner));
        Packed y = ball.element(std::uint32_t(rng() % inner));
        Packed z = ball.element(std::uint32_t(rng() % inner));
        double fxz = first_passage(f, x, z);
        double fxy = first_passage(f, x, y);
        double fyz = first_passage(f, y, z);
        rep.supermult_min_margin = std::min(rep.supermult_min_margin, fxz - fxy * fyz);
        int d = distance(pres, y, z);
        if (d > 0) {
            double need = std::pow(f.value_at(z) / f.value_at(y), 1.0 / d);
            rep.harnack_C = std::max(rep.harnack_C, need);
        }
    }

    double tol = 3 * rep.certificate;
    rep.all_within_certificate = rep.supermult_min_margin >= -tol;
    for (double m : rep.retracing_margin) rep.all_within_certificate &= m >= -tol;
    for (double m : rep.renewal_margin) rep.all_within_certificate &= m >= -tol;
    for (double m : rep.backscatter_margin) rep.all_within_certificate &= m >= -tol;
    return rep;
}

double derivative_identity_check(const CayleyBall& ball, double r, int horizon, double rho_upper,
                                 double h) {
    if (r <= 0) throw std::invalid_argument("derivative_identity_check: r must be > 0");
    GreenField f = green_field(ball, r, horizon, rho_upper);
    if (h == 0) {
        double cert = f.certified ? f.certificate(0) : 1e-12;
        h = std::max(1e-4, std::cbrt(cert));
    }
    if (h <= 0 || r - h <= 0)
        throw std::invalid_argument("derivative_identity_check: step size underflow");
    double gp = green_field(ball, r + h, horizon, rho_upper).origin();
    double gm = green_field(ball, r - h, horizon, rho_upper).origin();
    double lhs = (gp - gm) / (2 * h);
    double sumsq = 0;
    for (double v : f.values) sumsq += v * v;
    double rhs = (sumsq - f.origin()) / r;
    return std::fabs(lhs - rhs) / std::max(std::fabs(rhs), 1e-300);
}

ExponentFit eta_and_exponent(const CayleyBall& ball, double r_hat,
                             const std::vector<double>& delta_grid, int horizon,
                             double rho_upper) {
    ExponentFit fit;
    std::string usable;
    for (double d : delta_grid) {
        double r = r_hat - d;
        if (d <= 0 || r <= 0) continue;
        GreenField f = green_field(ball, r, horizon, rho_upper);
        double eta = 0;
        for (double v : f.values) eta += v * v;
        if (!std::isfinite(eta)) continue;
        fit.delta.push_back(d);
        fit.eta.push_back(eta);
        if (f.certified) ++fit.n_certified;
        usable += (usable.empty() ? "" : ", ") + std::to_string(d);
    }
    if (fit.delta.size() < 3)
        throw std::invalid_argument("eta_and_exponent: grid too close to r_hat; usable points: " +
                                    (usable.empty() ? std::string("none") : usable));
    std::vector<double> lx, ly, inv2;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < fit.delta.size(); ++i) {
        lx.push_back(std::log(fit.delta[i]));
        ly.push_back(std::log(fit.eta[i]));
        inv2.push_back(1.0 / (fit.eta[i] * fit.eta[i]));
        rows.push_back({1.0, std::log(fit.delta[i]), std::sqrt(fit.delta[i])});
    }
    fit.slope_plain = ols(lx, ly).slope;
    fit.slope_corrected = lsq_basis(rows, ly)[1];
    fit.inv_eta_sq = ols(fit.delta, inv2);
    return fit;
}

}  // namespace rwlab

#include "rwlab/brw.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace rwlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::mt19937_64 replica_rng(std::uint64_t seed, std::uint64_t replica) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(replica + 1)));
}

// Inversion keeps the draw sequence identical across platforms; the means
// used here are small, so the linear scan is also the fast path.
int poisson_draw(double lambda, std::mt19937_64& rng) {
    if (lambda <= 0) return 0;
    if (lambda < 30.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(rng);
        double p = std::exp(-lambda), cum = p;
        int k = 0;
        while (u > cum && k < 400) {
            ++k;
            p *= lambda / k;
            cum += p;
        }
        return k;
    }
    std::poisson_distribution<int> d(lambda);
    return d(rng);
}

struct Accumulator {
    std::vector<double> sum, sumsq;
    explicit Accumulator(std::uint64_t n) : sum(n, 0.0), sumsq(n, 0.0) {}
    void add(std::uint64_t i, double v) {
        sum[i] += v;
        sumsq[i] += v * v;
    }
    void finish(std::uint64_t replicas, std::vector<double>& mean,
                std::vector<double>& se) const {
        mean.assign(sum.size(), 0.0);
        se.assign(sum.size(), 0.0);
        double n = double(replicas);
        for (std::uint64_t i = 0; i < sum.size(); ++i) {
            mean[i] = sum[i] / n;
            if (replicas > 1) {
                double var = (sumsq[i] - sum[i] * sum[i] / n) / (n - 1);
                se[i] = std::sqrt(std::max(var, 0.0) / n);
            }
        }
    }
};

// (sum_{n<=horizon} r^n P^n)^T v on the absorbing ball; the uniform step is
// symmetric, so this is the same kernel the Green field iterates.
std::vector<double> apply_green(const CayleyBall& ball, double r, int horizon,
                                const std::vector<double>& v) {
    const int L = ball.n_letters();
    const double pl = 1.0 / L;
    const std::uint32_t* adj = ball.adj.data();
    std::vector<double> acc = v, u = v, w(ball.size(), 0.0);
    for (int n = 1; n <= horizon; ++n) {
        double mass = 0;
        for (std::uint64_t i = 0; i < ball.size(); ++i) {
            double s = 0;
            const std::uint32_t* row = adj + i * L;
            for (int l = 0; l < L; ++l)
                if (row[l] != CayleyBall::kNoNeighbor) s += u[row[l]];
            w[i] = r * pl * s;
            mass += w[i];
        }
        std::swap(u, w);
        for (std::uint64_t i = 0; i < ball.size(); ++i) acc[i] += u[i];
        if (mass == 0.0) break;
    }
    return acc;
}

}  // namespace

void BRWConfig::validate() const {
    if (r < 0) throw std::invalid_argument("brw: offspring mean must be >= 0");
    if (horizon < 0) throw std::invalid_argument("brw: horizon must be >= 0");
    if (particle_cap == 0) throw std::invalid_argument("brw: particle cap must be positive");
    if (replicas == 0) throw std::invalid_argument("brw: need at least one replica");
}

void ColoredBRWConfig::validate() const {
    if (R < 0 || eps < 0) throw std::invalid_argument("brw: offspring means must be >= 0");
    if (k_max < 0) throw std::invalid_argument("brw: k_max must be >= 0");
    if (horizon < 0) throw std::invalid_argument("brw: horizon must be >= 0");
    if (particle_cap == 0) throw std::invalid_argument("brw: particle cap must be positive");
    if (replicas == 0) throw std::invalid_argument("brw: need at least one replica");
}

VisitTally simulate_brw(const BRWConfig& cfg, const CayleyBall& ball) {
    cfg.validate();
    if (cfg.step) cfg.step->validate(ball.pres);
    const int L = ball.n_letters();

    VisitTally out;
    out.r = cfg.r;
    out.horizon = cfg.horizon;
    out.replicas = cfg.replicas;
    out.seed = cfg.seed;

    Accumulator site_acc(ball.size());
    Accumulator gen_acc(cfg.horizon + 1);

    std::vector<double> visits(ball.size(), 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<std::uint32_t> cur, next;
    std::vector<double> gen_sizes(cfg.horizon + 1, 0.0);

    std::discrete_distribution<int> step_dist;
    if (cfg.step) step_dist = std::discrete_distribution<int>(cfg.step->p.begin(), cfg.step->p.end());
    std::uniform_int_distribution<int> uletter(0, L - 1);

    for (std::uint64_t rep = 0; rep < cfg.replicas; ++rep) {
        auto rng = replica_rng(cfg.seed, rep);
        cur.assign(1, 0);
        std::fill(gen_sizes.begin(), gen_sizes.end(), 0.0);
        bool capped = false;
        for (int n = 0; n <= cfg.horizon; ++n) {
            gen_sizes[n] = double(cur.size());
            for (std::uint32_t s : cur) {
                if (visits[s] == 0.0) touched.push_back(s);
                visits[s] += 1.0;
            }
            if (n == cfg.horizon || cur.empty()) break;
            next.clear();
            for (std::uint32_t s : cur) {
                int brood = poisson_draw(cfg.r, rng);
                for (int j = 0; j < brood; ++j) {
                    int l = cfg.step ? step_dist(rng) : uletter(rng);
                    std::uint32_t t = ball.neighbor(s, static_cast<Letter>(l));
                    if (t != CayleyBall::kNoNeighbor) next.push_back(t);
                }
                if (next.size() > cfg.particle_cap) {
                    capped = true;
                    out.truncated = true;
                    ++out.truncated_runs;
                    if (out.truncated_generation < 0 || n + 1 < out.truncated_generation)
                        out.truncated_generation = n + 1;
                    break;
                }
            }
            if (capped) break;
            std::swap(cur, next);
        }
        for (std::uint32_t s : touched) {
            site_acc.add(s, visits[s]);
            visits[s] = 0.0;
        }
        touched.clear();
        for (int n = 0; n <= cfg.horizon; ++n) gen_acc.add(n, gen_sizes[n]);
    }

    site_acc.finish(cfg.replicas, out.mean, out.se);
    gen_acc.finish(cfg.replicas, out.generation_mean, out.generation_se);
    return out;
}

ColoredVisitTally colored_vk_mc(const ColoredBRWConfig& cfg, const CayleyBall& ball) {
    cfg.validate();
    const int L = ball.n_letters();
    const int K = cfg.k_max;

    ColoredVisitTally out;
    out.R = cfg.R;
    out.eps = cfg.eps;
    out.k_max = K;
    out.horizon = cfg.horizon;
    out.replicas = cfg.replicas;
    out.seed = cfg.seed;

    std::vector<Accumulator> visit_acc(K + 1, Accumulator(ball.size()));
    std::vector<Accumulator> pioneer_acc(K + 1, Accumulator(ball.size()));

    struct Particle {
        std::uint32_t site;
        std::uint8_t color;
    };
    std::vector<Particle> cur, next;
    // Per-replica tallies, swept via touched lists.
    std::vector<std::vector<double>> visits(K + 1, std::vector<double>(ball.size(), 0.0));
    std::vector<std::vector<double>> births(K + 1, std::vector<double>(ball.size(), 0.0));
    std::vector<std::vector<std::uint32_t>> vtouched(K + 1), btouched(K + 1);
    std::uniform_int_distribution<int> uletter(0, L - 1);

    for (std::uint64_t rep = 0; rep < cfg.replicas; ++rep) {
        auto rng = replica_rng(cfg.seed, rep);
        cur.assign(1, Particle{0, 0});
        bool capped = false;
        for (int n = 0; n <= cfg.horizon; ++n) {
            for (const Particle& p : cur) {
                auto& v = visits[p.color];
                if (v[p.site] == 0.0) vtouched[p.color].push_back(p.site);
                v[p.site] += 1.0;
            }
            if (n == cfg.horizon || cur.empty()) break;
            next.clear();
            for (const Particle& p : cur) {
                int brood = poisson_draw(cfg.R, rng);
                for (int j = 0; j < brood; ++j) {
                    std::uint32_t t = ball.neighbor(p.site, static_cast<Letter>(uletter(rng)));
                    if (t != CayleyBall::kNoNeighbor) next.push_back(Particle{t, p.color});
                }
                int pioneers = poisson_draw(cfg.eps, rng);
                if (pioneers > 0 && p.color < K) {
                    auto c = static_cast<std::uint8_t>(p.color + 1);
                    auto& b = births[c];
                    if (b[p.site] == 0.0) btouched[c].push_back(p.site);
                    b[p.site] += pioneers;
                    // Pioneers restart at the parent's site; their own jump
                    // happens on the next round, like the ancestor's.
                    for (int j = 0; j < pioneers; ++j) next.push_back(Particle{p.site, c});
                }
                if (next.size() > cfg.particle_cap) {
                    capped = true;
                    out.truncated = true;
                    ++out.truncated_runs;
                    break;
                }
            }
            if (capped) break;
            std::swap(cur, next);
        }
        for (int c = 0; c <= K; ++c) {
            for (std::uint32_t s : vtouched[c]) {
                visit_acc[c].add(s, visits[c][s]);
                visits[c][s] = 0.0;
            }
            vtouched[c].clear();
            for (std::uint32_t s : btouched[c]) {
                pioneer_acc[c].add(s, births[c][s]);
                births[c][s] = 0.0;
            }
            btouched[c].clear();
        }
    }

    out.mean.resize(K + 1);
    out.se.resize(K + 1);
    out.pioneer_mean.resize(K + 1);
    out.pioneer_se.resize(K + 1);
    for (int c = 0; c <= K; ++c) {
        visit_acc[c].finish(cfg.replicas, out.mean[c], out.se[c]);
        pioneer_acc[c].finish(cfg.replicas, out.pioneer_mean[c], out.pioneer_se[c]);
    }
    out.origin_partial_sums.resize(K + 1);
    double partial = 0;
    for (int c = 0; c <= K; ++c) {
        partial += out.mean[c][0];
        out.origin_partial_sums[c] = partial;
    }
    return out;
}

ColoredExact colored_vk_exact(double eps, int k_max, const CayleyBall& ball,
                              const GreenField& field) {
    if (eps < 0) throw std::invalid_argument("colored_vk_exact: eps must be >= 0");
    if (k_max < 0) throw std::invalid_argument("colored_vk_exact: k_max must be >= 0");
    if (field.ball != &ball || field.x0 != 0)
        throw std::invalid_argument(
            "colored_vk_exact: field must live on this ball, centered at the identity");

    ColoredExact out;
    out.eps = eps;
    out.k_max = k_max;
    out.vk.reserve(k_max + 1);
    out.vk.push_back(field.values);

    double row_sum = 0;
    for (double v : field.values) row_sum += v;
    double cert0 = field.certificate(0);
    out.cert_origin.assign(k_max + 1, cert0);

    for (int k = 1; k <= k_max; ++k) {
        auto next = apply_green(ball, field.r, field.horizon, out.vk.back());
        for (double& v : next) v *= eps;
        out.vk.push_back(std::move(next));
        out.cert_origin[k] = (k + 1) * cert0 * std::pow(eps * row_sum, k);
    }

    out.usable_k = -1;
    for (int k = 0; k <= k_max; ++k) {
        if (out.vk[k][0] > 0 && out.cert_origin[k] < 0.1 * out.vk[k][0])
            out.usable_k = k;
        else
            break;
    }
    return out;
}

SnapbackReport snapback_ratios(double delta, int k_max, const CayleyBall& ball,
                               const GreenField& field) {
    if (delta < 0) throw std::invalid_argument("snapback_ratios: delta must be >= 0");
    if (k_max < 1) throw std::invalid_argument("snapback_ratios: k_max must be >= 1");
    if (field.ball != &ball || field.x0 != 0)
        throw std::invalid_argument(
            "snapback_ratios: field must live on this ball, centered at the identity");

    std::vector<double> weight(ball.size());
    for (std::uint64_t i = 0; i < ball.size(); ++i)
        weight[i] = std::pow(1.0 + delta, ball.sphere_of(static_cast<std::uint32_t>(i)));

    SnapbackReport out;
    out.delta = delta;
    out.r = field.r;
    out.k_max = k_max;

    std::vector<double> chain = field.values;  // k-fold kernel power applied to G(1,.)
    for (int k = 1; k <= k_max; ++k) {
        double h = 0;
        for (std::uint64_t i = 0; i < ball.size(); ++i)
            h += chain[i] * weight[i] * field.values[i];
        out.H.push_back(h);
        if (k < k_max) chain = apply_green(ball, field.r, field.horizon, chain);
    }
    for (std::size_t k = 0; k + 1 < out.H.size(); ++k)
        out.ratios.push_back(out.H[k + 1] / out.H[k]);
    return out;
}

}  // namespace rwlab

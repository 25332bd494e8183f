#pragma once

#include <cstdint>
#include <vector>

#include "rwlab/ball.hpp"
#include "rwlab/green.hpp"

namespace rwlab {

// Branching random walk with Poisson(r) offspring: at each step every
// particle is replaced by a Poisson(r) brood, and each child jumps to a
// uniformly random neighbor.  Children whose jump leaves the ball are
// absorbed, so per-site expected visits match the absorbing-boundary Green
// field at the same horizon exactly.
struct BRWConfig {
    double r = 0;
    int horizon = 0;
    std::uint64_t particle_cap = 10'000'000;
    std::uint64_t replicas = 1;
    std::uint64_t seed = 1;
    const StepDistribution* step = nullptr;

    void validate() const;
};

struct VisitTally {
    double r = 0;
    int horizon = 0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::vector<double> mean;  // per site, expected total visits
    std::vector<double> se;
    std::vector<double> generation_mean;  // brood size at each generation
    std::vector<double> generation_se;
    bool truncated = false;         // some replica hit the particle cap
    std::uint64_t truncated_runs = 0;
    int truncated_generation = -1;  // earliest generation at which the cap hit
};

VisitTally simulate_brw(const BRWConfig& cfg, const CayleyBall& ball);

// Colored decomposition: reproduction draws are split into independent
// Poisson(R) and Poisson(eps) broods.  Same-mean children inherit the
// parent's color and jump; the mean-eps children (pioneers) take color
// parent+1 and start a fresh walk at the parent's site, so that the
// expected color-k visit profile is the k-fold Green-kernel convolution
// scaled by eps^k, and expected pioneer births of color k+1 at a site equal
// eps times the color-k visits there.
struct ColoredBRWConfig {
    double R = 0;
    double eps = 0;
    int k_max = 2;
    int horizon = 0;
    std::uint64_t particle_cap = 10'000'000;
    std::uint64_t replicas = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ColoredVisitTally {
    double R = 0;
    double eps = 0;
    int k_max = 0;
    int horizon = 0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> mean;  // [color][site]
    std::vector<std::vector<double>> se;
    std::vector<std::vector<double>> pioneer_mean;  // [color][site], color >= 1
    std::vector<std::vector<double>> pioneer_se;
    std::vector<double> origin_partial_sums;  // over colors, visits at the start site
    bool truncated = false;
    std::uint64_t truncated_runs = 0;
};

ColoredVisitTally colored_vk_mc(const ColoredBRWConfig& cfg, const CayleyBall& ball);

// Truncated convolution powers v_k = eps^k G^{(k+1)}(1, .) computed by
// repeated application of the absorbing-ball kernel at the field's radius
// and horizon.  v_0 is the field itself.  The per-k certificate is the
// heuristic kernel-norm power: cert_k = cert_0 * (eps * sum_x G(1,x))^k
// grows geometrically, and usable_k is the last k where it stays below a
// tenth of v_k at the origin.
struct ColoredExact {
    double eps = 0;
    int k_max = 0;
    std::vector<std::vector<double>> vk;  // [k][site]
    std::vector<double> cert_origin;      // heuristic, per k
    int usable_k = 0;
};

ColoredExact colored_vk_exact(double eps, int k_max, const CayleyBall& ball,
                              const GreenField& field);

// H_k(delta) = sum over chains x_1..x_k of G(1,x_1) prod G(x_i,x_{i+1})
// (1+delta)^{|x_k|} G(x_k,1), truncated to the ball.  H_1(0) is the squared
// field sum; the ratio sequence H_{k+1}/H_k settles near the top of the
// kernel spectrum.
struct SnapbackReport {
    double delta = 0;
    double r = 0;
    int k_max = 0;
    std::vector<double> H;       // H_1 .. H_kmax
    std::vector<double> ratios;  // H_{k+1} / H_k
};

SnapbackReport snapback_ratios(double delta, int k_max, const CayleyBall& ball,
                               const GreenField& field);

// Region-restricted reproduction is out of scope; the predicate exists so
// callers can probe for it.
constexpr bool kRegionRestrictedReproduction = false;

}  // namespace rwlab

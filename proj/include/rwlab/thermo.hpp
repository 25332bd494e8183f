#pragma once

#include <cstdint>
#include <vector>

#include "rwlab/automaton.hpp"
#include "rwlab/green.hpp"
#include "rwlab/group.hpp"

namespace rwlab {

// Finite-order approximants f_n to the Green cocycle along automaton paths:
// f_n = log G_r(1, w_0..w_n) - log G_r(1, w_1..w_n).  On the degree-4g tree
// f_n = log F_r exactly for every n; in general sup |f_{n+1} - f_n| decays
// geometrically.
struct CocycleApprox {
    double r = 0;
    int max_order = 0;                   // largest n evaluated
    int usable_order = 0;                // largest n with certified ratios on all paths
    std::vector<std::vector<double>> f;  // f[path][n]
    double sup_norm = 0;
    std::vector<double> sup_diff;        // sup over paths of |f_{n+1} - f_n|
    double decay_rate = 0;               // fitted geometric rate of sup_diff (0 if flat)
};

CocycleApprox cocycle(const GreenField& field, const GeodesicAutomaton& aut, int n_paths,
                      int max_order, std::uint64_t seed = 1);

// Slope of m -> log sum_{|x|=m} G_r(1,x)^theta.  The slope is the pressure
// of theta times the cocycle; it vanishes at theta = 2, r = R.
struct PressureEstimate {
    double theta = 0;
    double r = 0;
    double slope = 0;
    double intercept = 0;
    double residual = 0;
    int m_lo = 0;
    int m_hi = 0;
    std::vector<double> log_sums;  // index m = 0 .. m_hi
};

PressureEstimate pressure(const GreenField& field, double theta, int m_lo = 2, int m_hi = 0);

// Closed-form slope on the degree-4g tree: log(4g-1) + theta * log F_r.
double covering_pressure_slope(int g, double r, double theta);

// #{x : G(1,x) >= eps} per epsilon; the usable range is bounded below by the
// truncation floor (the largest value the ball boundary could still carry).
struct LevelSetCount {
    std::vector<double> eps;
    std::vector<std::uint64_t> counts;
    std::vector<char> usable;
    double floor = 0;
    double slope = 0;  // log-log fit over usable grid points, target -2
    double residual = 0;
};

LevelSetCount level_set_count(const GreenField& field, const std::vector<double>& eps_grid);

// Martin kernel approximants G(x, y_n) / G(1, y_n) along a geodesic ray.
struct MartinKernelFit {
    Packed x = kEmptyWord;
    std::vector<double> ratios;
    double limit = 0;
    double rate = 0;  // fitted rho in |ratio_{n+1} - ratio_n| ~ C rho^n
    int usable = 0;   // entries with both lookups inside the ball
};

MartinKernelFit martin_kernel(const GreenField& field, Packed x, const std::vector<Packed>& ray);

// Geodesic ray as canonical prefixes y_1 .. y_length read off automaton
// edges; seed 0 follows the first edge deterministically.
std::vector<Packed> automaton_ray(const GeodesicAutomaton& aut, int length,
                                  std::uint64_t seed = 0);

// Distribution over x in S_m (weighted by G(1,x)^2) of the per-geodesic
// ergodic average (1/m) sum_y G(1,y) G(y,x) / G(1,x); its dispersion
// shrinks with m and the mean stabilizes.
struct ErgodicAverageReport {
    std::vector<int> ms;
    std::vector<std::vector<double>> averages;  // per m, per sampled x
    std::vector<double> median;
    std::vector<double> dispersion;  // interquartile range / median
    double stabilized_mean = 0;      // median at the largest m
    int samples = 0;
    std::uint64_t seed = 0;
};

ErgodicAverageReport geodesic_average_stability(const GreenField& field,
                                                const std::vector<int>& ms, int samples,
                                                std::uint64_t seed = 1);

}  // namespace rwlab

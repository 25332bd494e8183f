#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rwlab/ball.hpp"
#include "rwlab/fit.hpp"
#include "rwlab/group.hpp"
#include "rwlab/oracle.hpp"

namespace rwlab {

struct StepDistribution {
    std::vector<double> p;  // per letter

    static StepDistribution uniform(const GroupPresentation& pres);
    void validate(const GroupPresentation& pres) const;
};

// Partial sums of G_r(x0, .) by operator iteration with absorbing boundary.
// Truncation error is certified through an upper bound rho_upper on the
// spectral radius of the step operator: the n-step kernel is bounded by
// rho^n, so both the horizon tail and the mass leaked at the boundary admit
// geometric bounds whenever r * rho_upper < 1.
struct GreenField {
    double r = 0;
    const CayleyBall* ball = nullptr;
    std::uint32_t x0 = 0;
    int horizon = 0;
    double rho_upper = 0;
    bool certified = false;   // r * rho_upper < 1
    double tail_bound = 0;    // discarded horizon mass
    double leak_weighted = 0; // sum_n r^n * (mass leaked at step n)
    std::vector<double> values;

    double value(std::uint32_t idx) const { return values[idx]; }
    double value_at(Packed x) const;
    // Upper bound on the discarded contribution to G_r(x0, element idx).
    double certificate(std::uint32_t idx) const;
    double certificate_at(Packed x) const;
    double origin() const { return values[x0]; }
};

GreenField green_field(const CayleyBall& ball, double r, int horizon, double rho_upper,
                       std::uint32_t x0 = 0, const StepDistribution* step = nullptr);

// F_r(x,y) = G_r(1, x^{-1}y) / G_r(1,1) by transitivity; field must be based
// at the identity.
double first_passage(const GreenField& field, Packed x, Packed y);

// Sum over paths from x to y whose interior vertices satisfy omega.
double restricted_green(const CayleyBall& ball, double r, int horizon, Packed x, Packed y,
                        const std::function<bool(Packed)>& omega,
                        const StepDistribution* step = nullptr);

// First-return sum at the identity over paths avoiding x: the quantity
// driving the retracing and renewal inequalities.  Value < 1 below the
// radius of convergence.
double avoidance(const CayleyBall& ball, double r, int horizon, Packed x,
                 const StepDistribution* step = nullptr);

// |G_r(1,1)(1 - sum_a p_a r F_r(1,a)) - 1|
double renewal_residual(const GreenField& field);

// p_0 .. p_steps: n-step return probabilities by exact convolution on the
// ball; exact (no truncation effect) for n <= 2 * ball.radius.
std::vector<double> return_series(const CayleyBall& ball, int steps,
                                  const StepDistribution* step = nullptr);

// G_r(1, x) for |x| = 0..max_dist on the degree-4g tree via the lumped
// radial chain; exact up to the horizon truncation (the chain cannot leave
// [0, horizon], so there is no spatial truncation at all).
std::vector<double> tree_green_radial(int g, double r, int horizon, int max_dist);

struct PatternError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Certified upper bound on the spectral radius of the step operator from a
// subinvariant weight s^{|x|} t_{type(x)}, where types are local distance
// patterns of the given radius collected on the ball.  The pointwise
// subinvariance inequality is verified on every interior element; that the
// ball exhibits every pattern of the infinite graph is the one disclosed
// assumption.  Throws PatternError if the pattern/transition table does not
// stabilize on this ball (retry with a larger pattern radius or ball).
double certified_rho_upper(const CayleyBall& ball, int pattern_radius = 2,
                           const StepDistribution* step = nullptr);

struct SpectralRadiusEstimate {
    double estimate = 0;        // Aitken-accelerated corrected ratio sequence
    double lower = 0;           // certified: 1 / certified_rho_upper
    double upper = 0;           // certified: min of ratio/subsequence/covering bounds
    double ratio_upper = 0;     // min_n sqrt(p_2n / p_{2n+2})
    double subseq_upper = 0;    // min_n p_2n^{-1/2n}
    double covering_upper = 0;  // tree walk radius (upper bound for quotients)
    double dirichlet_value = 0; // 1 / top absorbing-ball eigenvalue; consistency only
    bool zuk_gate = false;      // lower > sqrt(g)
    int pattern_radius = 0;
    int n_types = 0;
    std::vector<double> p2n;    // exact even return probabilities
};

SpectralRadiusEstimate spectral_radius(const CayleyBall& ball, int max_pattern_radius = 3);

struct AnconaScan {
    std::vector<double> r_grid;
    std::vector<double> c_hat;      // per-r max of G(1,w) / (G(1,u) G(1,u^{-1}w))
    int samples = 0;
    std::uint64_t seed = 0;
};

AnconaScan ancona_scan(const CayleyBall& ball, const std::vector<double>& r_grid, int horizon,
                       double rho_upper, int samples, std::uint64_t seed);

struct InequalityReport {
    double r = 0;
    std::vector<Packed> probes;              // elements x used below
    std::vector<double> retracing_margin;    // F(1,x) - p_x r / (1 - A(1;x))
    std::vector<double> renewal_margin;      // 1/(1 - A - F^2) - G(1,1)
    std::vector<double> backscatter_margin;  // sum_{n>=2|x|} p_n r^n - F(1,x)^2 G(1,1)
    double supermult_min_margin = 0;         // min over triples of F(x,z) - F(x,y)F(y,z)
    double harnack_C = 0;                    // smallest empirical C for G(1,z) <= C^{d(y,z)} G(1,y)
    double certificate = 0;                  // combined truncation allowance
    bool all_within_certificate = true;
};

InequalityReport inequality_suite(const CayleyBall& ball, double r, int horizon, double rho_upper,
                                  std::uint64_t seed = 1);

// Relative error of the finite-difference derivative of G_r(1,1) against
// r^{-1} (sum_z G_r(1,z)^2 - G_r(1,1)).
double derivative_identity_check(const CayleyBall& ball, double r, int horizon, double rho_upper,
                                 double h = 0);

struct ExponentFit {
    std::vector<double> delta;  // R_hat - r, usable points
    std::vector<double> eta;    // sum_x G_r(1,x)^2
    double slope_plain = 0;     // OLS log eta vs log delta (target -1/2)
    double slope_corrected = 0; // basis {1, log delta, sqrt delta}
    LinFit inv_eta_sq;          // eta^{-2} against delta
    int n_certified = 0;        // points with a finite truncation certificate
};

ExponentFit eta_and_exponent(const CayleyBall& ball, double r_hat,
                             const std::vector<double>& delta_grid, int horizon,
                             double rho_upper);

}  // namespace rwlab

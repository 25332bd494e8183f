#pragma once

#include <cstdint>
#include <vector>

namespace rwlab {

// Closed forms for the nearest-neighbour walk on the degree-4g tree (the
// covering walk of the genus-g presentations), used as the exact reference
// for the numerical engine.  All values in extended precision: the square
// root near the branch point loses half the digits.
struct OracleValues {
    long double F;  // first passage to a fixed neighbour
    long double G;  // Green's function at the identity
    long double R;  // radius of convergence, R^2 = 4g^2/(4g-1)
};

std::uint64_t catalan(int n);
long double catalan_gf(long double z);

long double covering_R(int g);
OracleValues covering_oracle(long double r, int g);

// First passage to a point at the given distance: F^dist.
long double covering_first_passage(long double r, int g, int dist);

// Catalan lower bound on the 2n-step return probability.
long double return_prob_lower_bound(int n, int g);

// Exact return probabilities p_{2n}, n = 0..nmax, of the covering walk via
// the lumped distance chain.
std::vector<long double> tree_return_probs(int g, int nmax);

}  // namespace rwlab

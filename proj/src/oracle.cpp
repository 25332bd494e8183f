#include "rwlab/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwlab {

std::uint64_t catalan(int n) {
    if (n < 0) throw std::invalid_argument("catalan: n must be >= 0");
    unsigned __int128 c = 1;
    for (int k = 0; k < n; ++k) {
        c = c * 2 * (2 * k + 1) / (k + 2);
        if (c > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("catalan: value exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(c);
}

long double catalan_gf(long double z) {
    if (z < 0 || z > 0.25L) throw std::domain_error("catalan_gf: z must lie in [0, 1/4]");
    // (1 - sqrt(1-4z))/(2z) rationalized; exact and stable down to z = 0
    return 2.0L / (1.0L + std::sqrt(1.0L - 4.0L * z));
}

long double covering_R(int g) {
    if (g < 1) throw std::invalid_argument("covering_R: g must be >= 1");
    return 2.0L * g / std::sqrt(4.0L * g - 1.0L);
}

OracleValues covering_oracle(long double r, int g) {
    if (g < 1) throw std::invalid_argument("covering_oracle: g must be >= 1");
    long double R = covering_R(g);
    if (r <= 0 || r > R * (1 + 1e-18L))
        throw std::domain_error("covering_oracle: r must lie in (0, R]");
    if (r > R) r = R;
    long double p = 1.0L / (4 * g);
    long double q = 1.0L - p;
    long double eps = std::numeric_limits<long double>::epsilon();
    long double disc = (R - r <= 8 * eps * R)
                           ? 0.0L
                           : std::sqrt(std::max(0.0L, 1.0L - 4.0L * p * q * r * r));
    // minus root of F = pr + qrF^2, rationalized for small r
    long double F = 2.0L * p * r / (1.0L + disc);
    long double G = 1.0L / (1.0L - r * F);
    return {F, G, R};
}

long double covering_first_passage(long double r, int g, int dist) {
    if (dist < 0) throw std::invalid_argument("covering_first_passage: negative distance");
    return std::pow(covering_oracle(r, g).F, (long double)dist);
}

long double return_prob_lower_bound(int n, int g) {
    if (n < 0 || g < 1) throw std::invalid_argument("return_prob_lower_bound: bad arguments");
    long double kappa;
    if (n <= 36) {
        kappa = (long double)catalan(n);
    } else {
        kappa = 1.0L;
        for (int k = 0; k < n; ++k) kappa = kappa * 2 * (2 * k + 1) / (k + 2);
    }
    return kappa * std::pow((4.0L * g - 1) / (4.0L * g), (long double)n) *
           std::pow(1.0L / (4 * g), (long double)n);
}

std::vector<long double> tree_return_probs(int g, int nmax) {
    if (g < 1 || nmax < 0) throw std::invalid_argument("tree_return_probs: bad arguments");
    long double p = 1.0L / (4 * g);
    long double q = 1.0L - p;
    std::vector<long double> u(2 * nmax + 2, 0.0L), v(u.size(), 0.0L);
    u[0] = 1.0L;
    std::vector<long double> out{1.0L};
    for (int step = 1; step <= 2 * nmax; ++step) {
        std::fill(v.begin(), v.end(), 0.0L);
        v[1] += u[0];
        for (std::size_t k = 1; k + 1 < u.size(); ++k) {
            v[k - 1] += p * u[k];
            v[k + 1] += q * u[k];
        }
        std::swap(u, v);
        if (step % 2 == 0) out.push_back(u[0]);
    }
    return out;
}

}  // namespace rwlab

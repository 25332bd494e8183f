#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwlab/group.hpp"

namespace rwlab {

struct ResourceError : std::runtime_error {
    int largest_feasible;
    ResourceError(const std::string& what, int feasible)
        : std::runtime_error(what), largest_feasible(feasible) {}
};

// Exact ball of given radius in the Cayley graph.  Elements are canonical
// packed words ordered by (sphere, ShortLex); adjacency is index-based with
// kNoNeighbor marking products that leave the ball.
struct CayleyBall {
    static constexpr std::uint32_t kNoNeighbor = std::numeric_limits<std::uint32_t>::max();

    GroupPresentation pres;
    int radius = 0;
    std::vector<Packed> elements;
    std::vector<std::uint64_t> sphere_off;  // size radius + 2
    std::vector<std::uint32_t> adj;         // elements.size() * n_letters

    std::uint64_t size() const { return elements.size(); }
    int n_letters() const { return pres.n_letters(); }

    std::uint32_t index_of(Packed w) const;
    int sphere_of(std::uint32_t idx) const;
    Packed element(std::uint32_t idx) const { return elements[idx]; }
    std::uint32_t neighbor(std::uint32_t idx, Letter l) const {
        return adj[std::uint64_t(idx) * n_letters() + l];
    }
    std::vector<std::uint64_t> sphere_counts() const;
};

constexpr std::uint64_t kDefaultMemBudget = 4ull << 30;

CayleyBall ball_enumerate(const GroupPresentation& pres, int radius,
                          std::uint64_t mem_budget = kDefaultMemBudget);

// Sphere sizes |S_0| .. |S_max_radius| without storing the ball or its
// adjacency; only the frontier sphere is kept.
std::vector<std::uint64_t> sphere_count_series(const GroupPresentation& pres, int max_radius,
                                               std::uint64_t mem_budget = kDefaultMemBudget);

// Least-squares growth rate zeta from the tail of a sphere-count series.
double fitted_growth(const std::vector<std::uint64_t>& counts, int tail = 4);

void save_ball(const CayleyBall& ball, const std::string& path);
CayleyBall load_ball(const std::string& path);

}  // namespace rwlab

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rwlab/group.hpp"

#include <json.hpp>

namespace rwlab {

struct AutomatonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AutomatonCertificate {
    int signature_radius = 0;
    int validated_radius = 0;
    // path_counts[m] = number of accepted length-m paths; must equal the
    // breadth-first sphere count for every m <= validated_radius.
    std::vector<std::uint64_t> path_counts;
    std::vector<std::uint64_t> sphere_counts;
    int random_paths_checked = 0;
    bool counts_match = false;
};

// Deterministic finite automaton whose accepted words are exactly the
// canonical ShortLex geodesic normal forms.  State 0 is the start state and
// has no incoming edges; every other state is a cone type, keyed by the set
// of canonical extensions of bounded length.
struct GeodesicAutomaton {
    GroupPresentation pres;
    int signature_radius = 0;
    int n_states = 0;
    std::vector<std::vector<std::pair<Letter, int>>> edges;  // sorted by letter
    std::vector<Word> witness;  // shortest canonical word reaching each state
    AutomatonCertificate cert;
};

inline constexpr int kDefaultSignatureRadius = 3;

// Builds the automaton at the requested signature radius (0 = default),
// raising it until the automaton is stable under radius + 1, then validates
// path counts against breadth-first sphere counts up to validate_radius and
// spot-checks random paths for geodesy and canonicality.
GeodesicAutomaton build_automaton(const GroupPresentation& pres, int signature_radius = 0,
                                  int validate_radius = 6);

struct RecurrentClass {
    std::vector<char> recurrent;  // per state
    int n_recurrent = 0;
    int n_transient = 0;
    double zeta = 0;     // Perron eigenvalue of the recurrent incidence matrix
    double entropy = 0;  // log zeta
};

// Strongly-connected-component classification.  Throws AutomatonError when
// the cycle-carrying components do not form a single class, or when the
// entropy is not positive.
RecurrentClass recurrent_class(const GeodesicAutomaton& aut);

struct GrowthData {
    std::vector<std::uint64_t> path_counts;
    std::vector<std::uint64_t> sphere_counts;
    double zeta = 0;
    double entropy = 0;
    double C = 0;  // |S_m| ~ C zeta^m, fitted on the tail
    bool exact_match = false;
};

GrowthData growth(const GeodesicAutomaton& aut, const std::vector<std::uint64_t>& sphere_counts);

std::vector<std::uint64_t> automaton_path_counts(const GeodesicAutomaton& aut, int max_m);

// Graph isomorphism respecting edge labels and the start state.  Both
// automata are deterministic, so a single breadth-first relabeling decides.
bool automata_isomorphic(const GeodesicAutomaton& a, const GeodesicAutomaton& b);

nlohmann::json automaton_to_json(const GeodesicAutomaton& aut, const RecurrentClass* rc = nullptr);
std::string automaton_to_dot(const GeodesicAutomaton& aut, const RecurrentClass* rc = nullptr);

}  // namespace rwlab

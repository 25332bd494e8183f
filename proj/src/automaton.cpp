#include "rwlab/automaton.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <cmath>
#include <sstream>

#include "rwlab/ball.hpp"

namespace rwlab {

namespace {

constexpr int kStateCap = 20000;
constexpr int kMaxSignatureRadius = 6;

// A cone-type signature is the prefix-closed set of short canonical
// extensions, each encoded as a base-(n_letters + 1) integer.
using Signature = std::vector<std::uint32_t>;

bool canonical_extension(const GroupPresentation& pres, const Word& w, Letter l) {
    Word u = w;
    u.push_back(l);
    if ((int)u.size() > pres.max_len)
        throw AutomatonError("cone-type signature exceeds the packed word capacity; "
                             "lower the signature radius");
    return canonical_form(pres, u) == pack_word(u, pres.bits, pres.max_len);
}

void signature_dfs(const GroupPresentation& pres, Word& u, int depth, std::uint32_t code,
                   Signature& out) {
    if (depth == 0) return;
    for (Letter l = 0; l < (Letter)pres.n_letters(); ++l) {
        if (!canonical_extension(pres, u, l)) continue;
        std::uint32_t c = code * (pres.n_letters() + 1) + (l + 1);
        out.push_back(c);
        u.push_back(l);
        signature_dfs(pres, u, depth - 1, c, out);
        u.pop_back();
    }
}

Signature signature_of(const GroupPresentation& pres, const Word& w, int radius) {
    Signature out;
    Word u = w;
    signature_dfs(pres, u, radius, 0, out);
    std::sort(out.begin(), out.end());
    return out;
}

GeodesicAutomaton build_raw(const GroupPresentation& pres, int radius) {
    GeodesicAutomaton aut;
    aut.pres = pres;
    aut.signature_radius = radius;
    aut.witness.push_back({});
    aut.edges.emplace_back();

    // The start state is never keyed by its signature: even if some element
    // shared it, merging would create an edge into the start state.
    std::map<Signature, int> ids;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        const Word w = aut.witness[s];
        for (Letter l = 0; l < (Letter)pres.n_letters(); ++l) {
            if (!canonical_extension(pres, w, l)) continue;
            Word w2 = w;
            w2.push_back(l);
            Signature sig = signature_of(pres, w2, radius);
            auto [it, fresh] = ids.try_emplace(std::move(sig), (int)aut.witness.size());
            if (fresh) {
                if (it->second >= kStateCap)
                    throw AutomatonError("cone-type state cap exceeded");
                aut.witness.push_back(w2);
                aut.edges.emplace_back();
                queue.push_back(it->second);
            }
            aut.edges[s].emplace_back(l, it->second);
        }
    }
    aut.n_states = (int)aut.witness.size();
    return aut;
}

void validate(GeodesicAutomaton& aut, int validate_radius) {
    for (const auto& out : aut.edges)
        for (auto [l, t] : out)
            if (t == 0) throw AutomatonError("edge into the start state");

    aut.cert.signature_radius = aut.signature_radius;
    aut.cert.validated_radius = validate_radius;
    aut.cert.path_counts = automaton_path_counts(aut, validate_radius);
    aut.cert.sphere_counts = sphere_count_series(aut.pres, validate_radius);
    aut.cert.counts_match = aut.cert.path_counts == aut.cert.sphere_counts;
    if (!aut.cert.counts_match)
        throw AutomatonError("automaton path counts disagree with breadth-first sphere counts");

    // Spot check: random accepted paths spell canonical geodesic words.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    const int n_paths = 10000;
    int max_len = std::min(aut.pres.max_len, std::max(validate_radius, 8));
    for (int i = 0; i < n_paths; ++i) {
        int target = 1 + (int)(rng() % max_len);
        int s = 0;
        Word w;
        for (int step = 0; step < target && !aut.edges[s].empty(); ++step) {
            auto [l, t] = aut.edges[s][rng() % aut.edges[s].size()];
            w.push_back(l);
            s = t;
        }
        Packed c = canonical_form(aut.pres, w);
        if (packed_len(c, aut.pres.bits) != (int)w.size() ||
            c != pack_word(w, aut.pres.bits, aut.pres.max_len))
            throw AutomatonError("accepted path spells a non-canonical word: " + word_name(w));
    }
    aut.cert.random_paths_checked = n_paths;
}

}  // namespace

GeodesicAutomaton build_automaton(const GroupPresentation& pres, int signature_radius,
                                  int validate_radius) {
    int k = signature_radius > 0 ? signature_radius : kDefaultSignatureRadius;
    GeodesicAutomaton aut = build_raw(pres, k);
    for (;;) {
        GeodesicAutomaton next = build_raw(pres, k + 1);
        if (automata_isomorphic(aut, next)) break;
        if (++k >= kMaxSignatureRadius)
            throw AutomatonError("cone-type signatures unstable at radius " + std::to_string(k));
        aut = std::move(next);
    }
    validate(aut, validate_radius);
    return aut;
}

std::vector<std::uint64_t> automaton_path_counts(const GeodesicAutomaton& aut, int max_m) {
    std::vector<std::uint64_t> counts{1};
    std::vector<std::uint64_t> cur(aut.n_states, 0), next(aut.n_states);
    cur[0] = 1;
    for (int m = 1; m <= max_m; ++m) {
        std::fill(next.begin(), next.end(), 0);
        for (int s = 0; s < aut.n_states; ++s) {
            if (!cur[s]) continue;
            for (auto [l, t] : aut.edges[s]) next[t] += cur[s];
        }
        cur.swap(next);
        std::uint64_t total = 0;
        for (auto c : cur) total += c;
        counts.push_back(total);
    }
    return counts;
}

RecurrentClass recurrent_class(const GeodesicAutomaton& aut) {
    int n = aut.n_states;
    // Iterative Tarjan.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack, call, edge_pos;
    std::vector<char> on_stack(n, 0);
    int next_index = 0, n_comp = 0;
    std::vector<std::vector<int>> comps;
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back(root);
        edge_pos.push_back(0);
        while (!call.empty()) {
            int v = call.back();
            if (edge_pos.back() == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            if (edge_pos.back() < (int)aut.edges[v].size()) {
                int w = aut.edges[v][edge_pos.back()++].second;
                if (index[w] == -1) {
                    call.push_back(w);
                    edge_pos.push_back(0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    comps.emplace_back();
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = n_comp;
                        comps.back().push_back(w);
                    } while (w != v);
                    ++n_comp;
                }
                call.pop_back();
                edge_pos.pop_back();
                if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
            }
        }
    }

    RecurrentClass rc;
    rc.recurrent.assign(n, 0);
    int n_recurrent_comps = 0;
    const std::vector<int>* rec_comp = nullptr;
    for (const auto& c : comps) {
        bool cyclic = c.size() > 1;
        if (!cyclic)
            for (auto [l, t] : aut.edges[c[0]]) cyclic |= (t == c[0]);
        if (!cyclic) continue;
        ++n_recurrent_comps;
        rec_comp = &c;
        for (int v : c) rc.recurrent[v] = 1;
    }
    if (n_recurrent_comps != 1)
        throw AutomatonError("expected a single recurrent class, found " +
                             std::to_string(n_recurrent_comps));
    for (int v = 0; v < n; ++v) (rc.recurrent[v] ? rc.n_recurrent : rc.n_transient)++;

    // Perron eigenvalue of the recurrent incidence matrix by power iteration
    // on A + I (aperiodic, so the iteration converges even if A is periodic).
    const auto& rec = *rec_comp;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < (int)rec.size(); ++i) slot[rec[i]] = i;
    std::vector<double> x(rec.size(), 1.0), y(rec.size());
    double lambda = 0;
    for (int it = 0; it < 5000; ++it) {
        for (int i = 0; i < (int)rec.size(); ++i) {
            double acc = x[i];
            for (auto [l, t] : aut.edges[rec[i]])
                if (slot[t] >= 0) acc += x[slot[t]];
            y[i] = acc;
        }
        double norm = 0;
        for (double v : y) norm = std::max(norm, v);
        for (int i = 0; i < (int)rec.size(); ++i) x[i] = y[i] / norm;
        if (std::abs(norm - 1 - lambda) < 1e-15 * (1 + lambda) && it > 10) {
            lambda = norm - 1;
            break;
        }
        lambda = norm - 1;
    }
    rc.zeta = lambda;
    rc.entropy = std::log(lambda);
    if (!(rc.entropy > 0)) throw AutomatonError("recurrent class has non-positive entropy");
    return rc;
}

GrowthData growth(const GeodesicAutomaton& aut, const std::vector<std::uint64_t>& sphere_counts) {
    GrowthData g;
    g.sphere_counts = sphere_counts;
    int M = (int)sphere_counts.size() - 1;
    g.path_counts = automaton_path_counts(aut, M);
    g.exact_match = g.path_counts == g.sphere_counts;
    RecurrentClass rc = recurrent_class(aut);
    g.zeta = rc.zeta;
    g.entropy = rc.entropy;
    int lo = std::max(1, M - 3);
    double acc = 0;
    for (int m = lo; m <= M; ++m)
        acc += std::log((double)sphere_counts[m]) - m * std::log(g.zeta);
    g.C = std::exp(acc / (M - lo + 1));
    return g;
}

bool automata_isomorphic(const GeodesicAutomaton& a, const GeodesicAutomaton& b) {
    if (a.n_states != b.n_states) return false;
    std::vector<int> map_ab(a.n_states, -1);
    map_ab[0] = 0;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        int t = map_ab[s];
        if (a.edges[s].size() != b.edges[t].size()) return false;
        for (size_t i = 0; i < a.edges[s].size(); ++i) {
            auto [la, sa] = a.edges[s][i];
            auto [lb, sb] = b.edges[t][i];
            if (la != lb) return false;
            if (map_ab[sa] == -1) {
                map_ab[sa] = sb;
                queue.push_back(sa);
            } else if (map_ab[sa] != sb) {
                return false;
            }
        }
    }
    return std::find(map_ab.begin(), map_ab.end(), -1) == map_ab.end();
}

nlohmann::json automaton_to_json(const GeodesicAutomaton& aut, const RecurrentClass* rc) {
    nlohmann::json j;
    j["genus"] = aut.pres.genus;
    j["surface"] = aut.pres.surface;
    j["signature_radius"] = aut.signature_radius;
    j["n_states"] = aut.n_states;
    j["start"] = 0;
    auto states = nlohmann::json::array();
    for (int s = 0; s < aut.n_states; ++s) {
        nlohmann::json st;
        st["id"] = s;
        st["witness"] = word_name(aut.witness[s]);
        if (rc) st["recurrent"] = (bool)rc->recurrent[s];
        states.push_back(std::move(st));
    }
    j["states"] = std::move(states);
    auto edges = nlohmann::json::array();
    for (int s = 0; s < aut.n_states; ++s)
        for (auto [l, t] : aut.edges[s])
            edges.push_back({{"from", s}, {"letter", letter_name(l)}, {"to", t}});
    j["edges"] = std::move(edges);
    nlohmann::json cert;
    cert["validated_radius"] = aut.cert.validated_radius;
    cert["path_counts"] = aut.cert.path_counts;
    cert["sphere_counts"] = aut.cert.sphere_counts;
    cert["counts_match"] = aut.cert.counts_match;
    cert["random_paths_checked"] = aut.cert.random_paths_checked;
    j["certificate"] = std::move(cert);
    if (rc) {
        j["zeta"] = rc->zeta;
        j["entropy"] = rc->entropy;
    }
    return j;
}

std::string automaton_to_dot(const GeodesicAutomaton& aut, const RecurrentClass* rc) {
    std::ostringstream os;
    os << "digraph geodesic_automaton {\n  rankdir=LR;\n";
    for (int s = 0; s < aut.n_states; ++s) {
        os << "  s" << s << " [label=\"" << (s == 0 ? "start" : word_name(aut.witness[s]))
           << "\"";
        if (s == 0) os << ", shape=doublecircle";
        if (rc && rc->recurrent[s]) os << ", style=bold";
        os << "];\n";
    }
    for (int s = 0; s < aut.n_states; ++s)
        for (auto [l, t] : aut.edges[s])
            os << "  s" << s << " -> s" << t << " [label=\"" << letter_name(l) << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace rwlab

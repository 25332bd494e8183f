#include "rwlab/ball.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace rwlab {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
    auto p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

// Candidate buffer for the next sphere would need |S_m| * L packed words.
void check_budget(std::uint64_t frontier, int n_letters, std::uint64_t resident_bytes,
                  std::uint64_t mem_budget, int done_radius) {
    std::uint64_t need = resident_bytes + frontier * std::uint64_t(n_letters) * sizeof(Packed);
    if (need > mem_budget)
        throw ResourceError("ball_enumerate: memory budget exceeded; largest feasible radius is " +
                                std::to_string(done_radius),
                            done_radius);
}

std::vector<Packed> expand_sphere(const GroupPresentation& pres, const std::vector<Packed>& sphere,
                                  int target_len) {
    std::vector<Packed> cand;
    cand.reserve(sphere.size() * pres.n_letters());
    for (Packed w : sphere)
        for (int l = 0; l < pres.n_letters(); ++l) {
            Packed c = multiply_letter(pres, w, static_cast<Letter>(l));
            if (packed_len(c, pres.bits) == target_len) cand.push_back(c);
        }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    cand.shrink_to_fit();
    return cand;
}

}  // namespace

std::uint32_t CayleyBall::index_of(Packed w) const {
    int len = packed_len(w, pres.bits);
    if (len > radius) return kNoNeighbor;
    auto first = elements.begin() + sphere_off[len];
    auto last = elements.begin() + sphere_off[len + 1];
    auto it = std::lower_bound(first, last, w);
    if (it == last || *it != w) return kNoNeighbor;
    return static_cast<std::uint32_t>(it - elements.begin());
}

int CayleyBall::sphere_of(std::uint32_t idx) const {
    return packed_len(elements[idx], pres.bits);
}

std::vector<std::uint64_t> CayleyBall::sphere_counts() const {
    std::vector<std::uint64_t> out(radius + 1);
    for (int m = 0; m <= radius; ++m) out[m] = sphere_off[m + 1] - sphere_off[m];
    return out;
}

CayleyBall ball_enumerate(const GroupPresentation& pres, int radius, std::uint64_t mem_budget) {
    if (radius < 0) throw std::invalid_argument("ball_enumerate: radius must be >= 0");
    if (radius > pres.max_len)
        throw std::invalid_argument("ball_enumerate: radius exceeds packable word length");

    CayleyBall ball;
    ball.pres = pres;
    ball.radius = radius;
    ball.sphere_off = {0, 1};
    ball.elements = {kEmptyWord};

    std::uint64_t frontier_begin = 0;
    for (int m = 1; m <= radius; ++m) {
        std::uint64_t frontier = ball.elements.size() - frontier_begin;
        std::uint64_t resident =
            ball.elements.size() * sizeof(Packed) +
            ball.elements.size() * std::uint64_t(pres.n_letters()) * sizeof(std::uint32_t);
        check_budget(frontier, pres.n_letters(), resident, mem_budget, m - 1);
        std::vector<Packed> sphere(ball.elements.begin() + frontier_begin, ball.elements.end());
        std::vector<Packed> next = expand_sphere(pres, sphere, m);
        frontier_begin = ball.elements.size();
        ball.elements.insert(ball.elements.end(), next.begin(), next.end());
        ball.sphere_off.push_back(ball.elements.size());
    }

    const int L = pres.n_letters();
    ball.adj.assign(ball.elements.size() * std::uint64_t(L), CayleyBall::kNoNeighbor);
    for (std::uint64_t i = 0; i < ball.elements.size(); ++i)
        for (int l = 0; l < L; ++l)
            ball.adj[i * L + l] =
                ball.index_of(multiply_letter(pres, ball.elements[i], static_cast<Letter>(l)));
    return ball;
}

std::vector<std::uint64_t> sphere_count_series(const GroupPresentation& pres, int max_radius,
                                               std::uint64_t mem_budget) {
    if (max_radius < 0 || max_radius > pres.max_len)
        throw std::invalid_argument("sphere_count_series: bad radius");
    std::vector<std::uint64_t> counts{1};
    std::vector<Packed> sphere{kEmptyWord};
    for (int m = 1; m <= max_radius; ++m) {
        check_budget(sphere.size(), pres.n_letters(), sphere.size() * sizeof(Packed), mem_budget,
                     m - 1);
        sphere = expand_sphere(pres, sphere, m);
        counts.push_back(sphere.size());
    }
    return counts;
}

double fitted_growth(const std::vector<std::uint64_t>& counts, int tail) {
    int n = static_cast<int>(counts.size());
    int lo = std::max(1, n - 1 - tail);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (int m = lo; m < n; ++m, ++k) {
        double x = m, y = std::log(double(counts[m]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if (k < 2) throw std::invalid_argument("fitted_growth: need at least two spheres");
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return std::exp(slope);
}

namespace {

constexpr char kMagic[4] = {'R', 'W', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

void write_all(std::FILE* f, const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f) != n) throw std::runtime_error("save_ball: write failed");
}

void read_all(std::FILE* f, void* p, std::size_t n) {
    if (std::fread(p, 1, n, f) != n)
        throw std::runtime_error("load_ball: truncated or unreadable file");
}

}  // namespace

void save_ball(const CayleyBall& ball, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_ball: cannot open " + path);
    std::uint32_t head[4] = {kVersion, std::uint32_t(ball.pres.genus),
                             std::uint32_t(ball.pres.surface ? 1 : 0), std::uint32_t(ball.radius)};
    std::uint64_t n = ball.elements.size();
    std::uint64_t hash = fnv1a(head, sizeof head);
    hash = fnv1a(ball.elements.data(), n * sizeof(Packed), hash);
    hash = fnv1a(ball.adj.data(), ball.adj.size() * sizeof(std::uint32_t), hash);
    try {
        write_all(f, kMagic, 4);
        write_all(f, head, sizeof head);
        write_all(f, &n, sizeof n);
        write_all(f, ball.sphere_off.data(), ball.sphere_off.size() * sizeof(std::uint64_t));
        write_all(f, ball.elements.data(), n * sizeof(Packed));
        write_all(f, ball.adj.data(), ball.adj.size() * sizeof(std::uint32_t));
        write_all(f, &hash, sizeof hash);
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
}

CayleyBall load_ball(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_ball: cannot open " + path);
    CayleyBall ball;
    try {
        char magic[4];
        read_all(f, magic, 4);
        if (std::memcmp(magic, kMagic, 4) != 0)
            throw std::runtime_error("load_ball: not a ball file");
        std::uint32_t head[4];
        read_all(f, head, sizeof head);
        if (head[0] != kVersion)
            throw std::runtime_error("load_ball: unsupported version " + std::to_string(head[0]));
        ball.pres = head[2] ? GroupPresentation::surface_group(int(head[1]))
                            : GroupPresentation::free_group(int(head[1]));
        ball.radius = int(head[3]);
        std::uint64_t n = 0;
        read_all(f, &n, sizeof n);
        ball.sphere_off.resize(ball.radius + 2);
        read_all(f, ball.sphere_off.data(), ball.sphere_off.size() * sizeof(std::uint64_t));
        if (ball.sphere_off.back() != n) throw std::runtime_error("load_ball: corrupt offsets");
        ball.elements.resize(n);
        read_all(f, ball.elements.data(), n * sizeof(Packed));
        ball.adj.resize(n * std::uint64_t(ball.pres.n_letters()));
        read_all(f, ball.adj.data(), ball.adj.size() * sizeof(std::uint32_t));
        std::uint64_t hash = 0, expect;
        read_all(f, &expect, sizeof expect);
        hash = fnv1a(head, sizeof head);
        hash = fnv1a(ball.elements.data(), n * sizeof(Packed), hash);
        hash = fnv1a(ball.adj.data(), ball.adj.size() * sizeof(std::uint32_t), hash);
        if (hash != expect) throw std::runtime_error("load_ball: checksum mismatch");
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
    return ball;
}

}  // namespace rwlab

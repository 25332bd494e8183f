#include "rwlab/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace rwlab {

namespace {

// Side s of the fundamental polygon crossed when reading letter l outward,
// and the letter read when crossing side s outward.  The two maps are
// mutually inverse; they encode how relator rotations glue the tiles.
int side_of_letter(Letter l) {
    static const int perm[4] = {0, 2, 3, 1};
    return (l & ~3) | perm[l & 3];
}

Letter letter_of_side(int s) {
    static const int perm[4] = {0, 3, 1, 2};
    return static_cast<Letter>((s & ~3) | perm[s & 3]);
}

int cyclic_distance(int a, int b, int n) {
    int d = std::abs(a - b) % n;
    return std::min(d, n - d);
}

}  // namespace

GeodesicSegment make_segment(const GroupPresentation& pres, Packed start, const Word& letters) {
    GeodesicSegment geo;
    geo.letters = letters;
    geo.vertices.reserve(letters.size() + 1);
    geo.vertices.push_back(start);
    Packed base_inv = inverse_packed(pres, start);
    for (std::size_t i = 0; i < letters.size(); ++i) {
        Packed v = multiply_letter(pres, geo.vertices.back(), letters[i]);
        if (packed_len(multiply(pres, base_inv, v), pres.bits) != int(i) + 1)
            throw std::invalid_argument("make_segment: letters do not spell a geodesic");
        geo.vertices.push_back(v);
    }
    return geo;
}

int distance(const GroupPresentation& pres, Packed x, Packed y) {
    return packed_len(multiply(pres, inverse_packed(pres, x), y), pres.bits);
}

std::vector<GeodesicSegment> geodesics_between(Packed x, Packed y, const CayleyBall& ball) {
    const GroupPresentation& pres = ball.pres;
    if (ball.index_of(x) == CayleyBall::kNoNeighbor || ball.index_of(y) == CayleyBall::kNoNeighbor)
        throw std::invalid_argument("geodesics_between: endpoint outside ball");
    Packed z = multiply(pres, inverse_packed(pres, x), y);
    int d = packed_len(z, pres.bits);
    if (d > ball.radius)
        throw std::invalid_argument("geodesics_between: endpoints farther apart than ball radius");

    std::vector<GeodesicSegment> out;
    Word letters;
    std::vector<Packed> path{kEmptyWord};

    auto dfs = [&](auto&& self, Packed v, int depth) -> void {
        if (depth == d) {
            GeodesicSegment geo;
            geo.letters = letters;
            geo.vertices.reserve(d + 1);
            for (Packed p : path) geo.vertices.push_back(multiply(pres, x, p));
            out.push_back(std::move(geo));
            return;
        }
        Packed v_inv_z = multiply(pres, inverse_packed(pres, v), z);
        for (int l = 0; l < pres.n_letters(); ++l) {
            Packed linv = (Packed{1} << pres.bits) | inverse_letter(Letter(l));
            if (packed_len(multiply(pres, linv, v_inv_z), pres.bits) != d - depth - 1) continue;
            Packed nv = multiply_letter(pres, v, Letter(l));
            letters.push_back(Letter(l));
            path.push_back(nv);
            self(self, nv, depth + 1);
            path.pop_back();
            letters.pop_back();
        }
    };
    dfs(dfs, kEmptyWord, 0);
    return out;
}

std::vector<Letter> family_letters(const GroupPresentation& pres, TreeFamily fam) {
    std::vector<Letter> out;
    for (int i = 0; i < pres.genus; ++i)
        out.push_back(static_cast<Letter>(4 * i + static_cast<int>(fam)));
    return out;
}

std::vector<TreeNode> free_semigroup_tree(const GroupPresentation& pres, TreeFamily fam, int depth,
                                          Packed root) {
    if (depth < 0) throw std::invalid_argument("free_semigroup_tree: negative depth");
    std::vector<Letter> letters = family_letters(pres, fam);
    Packed root_inv = inverse_packed(pres, root);
    std::vector<TreeNode> nodes{{root, 0, Letter{0}}};
    std::size_t level_begin = 0;
    for (int dth = 1; dth <= depth; ++dth) {
        std::size_t level_end = nodes.size();
        for (std::size_t i = level_begin; i < level_end; ++i)
            for (Letter l : letters) {
                Packed w = multiply_letter(pres, nodes[i].word, l);
                if (packed_len(multiply(pres, root_inv, w), pres.bits) != dth)
                    throw std::logic_error("free_semigroup_tree: path is not geodesic");
                nodes.push_back({w, static_cast<std::uint32_t>(i), l});
            }
        level_begin = level_end;
    }
    return nodes;
}

std::vector<CutPoint> find_cut_points(const GeodesicSegment& geo, const GroupPresentation& pres) {
    if (!pres.surface || pres.genus < 2)
        throw std::invalid_argument("find_cut_points: needs a hyperbolic surface presentation");
    if (geo.vertices.size() != geo.letters.size() + 1)
        throw std::invalid_argument("find_cut_points: malformed segment");
    if (!geo.letters.empty()) {
        Packed start_inv = inverse_packed(pres, geo.vertices.front());
        if (packed_len(multiply(pres, start_inv, geo.vertices.back()), pres.bits) != geo.length())
            throw std::invalid_argument("find_cut_points: segment is not geodesic");
    }

    const int n = pres.n_letters();
    std::vector<CutPoint> out;
    for (int k = 1; k < geo.length(); ++k) {
        int p_in = side_of_letter(inverse_letter(geo.letters[k - 1]));
        int p_out = side_of_letter(geo.letters[k]);
        if (cyclic_distance(p_in, p_out, n) < 2) continue;
        CutPoint cp;
        cp.index = k;
        cp.vertex = geo.vertices[k];
        Letter l_lo = letter_of_side((p_out + n - 1) % n);
        Letter l_hi = letter_of_side((p_out + 1) % n);
        cp.fam_in = letter_family(l_lo);
        cp.fam_out = letter_family(l_hi);
        cp.root_in = multiply_letter(pres, cp.vertex, l_lo);
        cp.root_out = multiply_letter(pres, cp.vertex, l_hi);
        out.push_back(cp);
    }
    return out;
}

}  // namespace rwlab

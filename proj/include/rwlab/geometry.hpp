#pragma once

#include <cstdint>
#include <vector>

#include "rwlab/ball.hpp"
#include "rwlab/group.hpp"

namespace rwlab {

struct GeodesicSegment {
    std::vector<Packed> vertices;  // length + 1 canonical forms
    Word letters;                  // edge labels, vertices[i+1] = vertices[i] * letters[i]

    int length() const { return static_cast<int>(letters.size()); }
};

// Builds the segment start, start*l0, start*l0*l1, ... and verifies it is
// geodesic (each vertex at distance i from start).
GeodesicSegment make_segment(const GroupPresentation& pres, Packed start, const Word& letters);

int distance(const GroupPresentation& pres, Packed x, Packed y);

// All geodesics from x to y.  Their interior stays within distance d(x,y) of
// x, so a ball of radius >= d(x,y) is enough; endpoints must lie in the ball.
std::vector<GeodesicSegment> geodesics_between(Packed x, Packed y, const CayleyBall& ball);

enum class TreeFamily { APlus, AMinus, BPlus, BMinus };

inline TreeFamily letter_family(Letter l) { return static_cast<TreeFamily>(l & 3); }

// Letters of a family: a1..ag, a1^-1..ag^-1, b1..bg or b1^-1..bg^-1.
std::vector<Letter> family_letters(const GroupPresentation& pres, TreeFamily fam);

struct TreeNode {
    Packed word;            // canonical form of root * path
    std::uint32_t parent;   // index into the node vector; root points to itself
    Letter via;             // edge letter from the parent (unused at the root)
};

// Rooted outdegree-g tree whose edges use one letter family.  Every
// root-to-node path is verified to be geodesic (distance = depth).
std::vector<TreeNode> free_semigroup_tree(const GroupPresentation& pres, TreeFamily fam, int depth,
                                          Packed root = kEmptyWord);

struct CutPoint {
    int index;        // vertex position along the segment
    Packed vertex;
    TreeFamily fam_in, fam_out;
    Packed root_in, root_out;  // roots of the two attached trees
};

// Positions where the segment crosses a fundamental tile between
// non-adjacent polygon sides, together with descriptors of the two disjoint
// trees hanging off the crossing vertex.
std::vector<CutPoint> find_cut_points(const GeodesicSegment& geo, const GroupPresentation& pres);

}  // namespace rwlab

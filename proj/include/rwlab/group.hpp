#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rwlab {

// Letters are numbered 4i+0 = a_{i+1}, 4i+1 = a_{i+1}^-1, 4i+2 = b_{i+1},
// 4i+3 = b_{i+1}^-1, so that numeric order is the ShortLex generator order
// a1 < a1^-1 < b1 < b1^-1 < a2 < ... and inversion is bit flip.
using Letter = std::uint8_t;
using Word = std::vector<Letter>;

// A word packed MSB-first behind a guard bit.  Packed values compare in
// ShortLex order: longer words have a higher guard bit, equal-length words
// compare lexicographically.
using Packed = std::uint64_t;

inline Letter inverse_letter(Letter l) { return static_cast<Letter>(l ^ 1u); }

constexpr Packed kEmptyWord = 1;  // just the guard bit

struct GroupPresentation {
    int genus = 0;
    bool surface = true;  // false: free group on 2*genus generators (no relator)
    Word relator;

    int bits = 3;     // bits per packed letter
    int max_len = 21; // longest packable word

    // Cyclic rotations of the relator and of its inverse.
    std::vector<Word> rotations;
    // Packed (2g+1)-letter rotation windows -> packed (2g-1)-letter complement.
    std::unordered_map<Packed, Packed> dehn_windows;
    // Packed 2g-letter half windows -> the equal-length complementary half.
    std::unordered_map<Packed, Packed> half_windows;
    // Packed 2-letter subwords of rotations (pairs lying on a common tile).
    std::unordered_set<Packed> tile_pairs;

    int n_letters() const { return 4 * genus; }
    int half_len() const { return 2 * genus; }
    bool valid_letter(Letter l) const { return l < n_letters(); }

    static GroupPresentation surface_group(int genus);
    static GroupPresentation free_group(int genus);
};

std::string letter_name(Letter l);
std::optional<Letter> parse_letter(const std::string& s);
std::string word_name(const Word& w);
Word parse_word(const GroupPresentation& pres, const std::string& s);

inline int packed_len(Packed w, int bits) {
    return (63 - std::countl_zero(w)) / bits;
}

Packed pack_word(const Word& w, int bits, int max_len);
Word unpack_word(Packed w, int bits);

inline Letter packed_letter(Packed w, int bits, int len, int i) {
    return static_cast<Letter>((w >> ((len - 1 - i) * bits)) & ((1u << bits) - 1));
}

Word inverse_word(const Word& w);
Word free_reduce(Word w);

// Rewrites until no freely reducible pair and no rotation window longer than
// half the relator remains.  The result has geodesic length but is not yet
// canonical.
Word dehn_shorten(const GroupPresentation& pres, Word w);

bool represents_identity(const GroupPresentation& pres, const Word& w);
bool equal_elements(const GroupPresentation& pres, const Word& a, const Word& b);

// Canonical ShortLex geodesic representative.
Word reduce_dehn(const GroupPresentation& pres, const Word& w);
Packed canonical_form(const GroupPresentation& pres, const Word& w);

// Canonical form of (canonical parent) * letter.  Cheap when the product's
// length is len(parent) +/- 1 relative to an already canonical parent.
Packed multiply_letter(const GroupPresentation& pres, Packed parent, Letter l);

// Canonical form of the product of two canonical words.
Packed multiply(const GroupPresentation& pres, Packed a, Packed b);

Packed inverse_packed(const GroupPresentation& pres, Packed w);

}  // namespace rwlab

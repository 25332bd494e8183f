#include "rwlab/group.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace rwlab {

namespace {

int bits_for(int n_letters) { return n_letters <= 8 ? 3 : 5; }

void add_window_map(std::unordered_map<Packed, Packed>& map, Packed key, Packed value) {
    // Distinct rotations may share a window; any complement is a valid
    // replacement, so keep the first.
    map.emplace(key, value);
}

Packed pack_raw(const Word& w, int bits) {
    Packed p = 1;
    for (Letter l : w) p = (p << bits) | l;
    return p;
}

}  // namespace

Packed pack_word(const Word& w, int bits, int max_len) {
    if ((int)w.size() > max_len)
        throw std::length_error("pack_word: word too long for packed representation");
    return pack_raw(w, bits);
}

Word unpack_word(Packed w, int bits) {
    int len = packed_len(w, bits);
    Word out(len);
    for (int i = 0; i < len; ++i) out[i] = packed_letter(w, bits, len, i);
    return out;
}

Word inverse_word(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (Letter& l : out) l = inverse_letter(l);
    return out;
}

Word free_reduce(Word w) {
    Word out;
    out.reserve(w.size());
    for (Letter l : w) {
        if (!out.empty() && out.back() == inverse_letter(l))
            out.pop_back();
        else
            out.push_back(l);
    }
    return out;
}

GroupPresentation GroupPresentation::surface_group(int genus) {
    if (genus < 1 || genus > 8)
        throw std::invalid_argument("surface_group: genus must be in [1,8]");
    GroupPresentation pres;
    pres.genus = genus;
    pres.surface = true;
    pres.bits = bits_for(4 * genus);
    pres.max_len = 63 / pres.bits;
    for (int i = 0; i < genus; ++i) {
        pres.relator.push_back(static_cast<Letter>(4 * i));      // a_i
        pres.relator.push_back(static_cast<Letter>(4 * i + 2));  // b_i
        pres.relator.push_back(static_cast<Letter>(4 * i + 1));  // a_i^-1
        pres.relator.push_back(static_cast<Letter>(4 * i + 3));  // b_i^-1
    }

    const int n = 4 * genus;
    Word rel_inv = inverse_word(pres.relator);
    for (int s = 0; s < n; ++s) {
        Word rot(n), roti(n);
        for (int j = 0; j < n; ++j) {
            rot[j] = pres.relator[(s + j) % n];
            roti[j] = rel_inv[(s + j) % n];
        }
        pres.rotations.push_back(rot);
        pres.rotations.push_back(roti);
    }

    const int h = 2 * genus;
    for (const Word& rho : pres.rotations) {
        Word dwin(rho.begin(), rho.begin() + h + 1);
        Word drep = inverse_word(Word(rho.begin() + h + 1, rho.end()));
        add_window_map(pres.dehn_windows, pack_raw(dwin, pres.bits), pack_raw(drep, pres.bits));

        Word hwin(rho.begin(), rho.begin() + h);
        Word hrep = inverse_word(Word(rho.begin() + h, rho.end()));
        add_window_map(pres.half_windows, pack_raw(hwin, pres.bits), pack_raw(hrep, pres.bits));

        for (int j = 0; j + 1 < n; ++j)
            pres.tile_pairs.insert(pack_raw(Word{rho[j], rho[j + 1]}, pres.bits));
    }
    return pres;
}

GroupPresentation GroupPresentation::free_group(int genus) {
    if (genus < 1 || genus > 8)
        throw std::invalid_argument("free_group: genus must be in [1,8]");
    GroupPresentation pres;
    pres.genus = genus;
    pres.surface = false;
    pres.bits = bits_for(4 * genus);
    pres.max_len = 63 / pres.bits;
    return pres;
}

std::string letter_name(Letter l) {
    static const char* stem[4] = {"a", "A", "b", "B"};
    return std::string(stem[l & 3]) + std::to_string((l >> 2) + 1);
}

std::optional<Letter> parse_letter(const std::string& s) {
    if (s.size() < 2) return std::nullopt;
    int c;
    switch (s[0]) {
        case 'a': c = 0; break;
        case 'A': c = 1; break;
        case 'b': c = 2; break;
        case 'B': c = 3; break;
        default: return std::nullopt;
    }
    int idx = 0;
    for (size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        idx = idx * 10 + (s[i] - '0');
    }
    if (idx < 1 || idx > 8) return std::nullopt;
    return static_cast<Letter>(4 * (idx - 1) + c);
}

std::string word_name(const Word& w) {
    if (w.empty()) return "e";
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += letter_name(w[i]);
    }
    return out;
}

Word parse_word(const GroupPresentation& pres, const std::string& s) {
    Word out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == '*' || c == ',') {
            ++i;
            continue;
        }
        if (c == 'e' && out.empty() && s.find_first_not_of(" e", i) == std::string::npos) break;
        size_t j = i + 1;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        auto l = parse_letter(s.substr(i, j - i));
        if (!l || !pres.valid_letter(*l))
            throw std::invalid_argument("parse_word: unknown letter at '" + s.substr(i) + "'");
        out.push_back(*l);
        i = j;
    }
    return out;
}

namespace {

// Genus 1 is the free abelian group on a1, b1; over-half rewriting alone can
// stall there (the group is not hyperbolic), so handle it by exponent sums.
bool is_grid(const GroupPresentation& pres) { return pres.surface && pres.genus == 1; }

void grid_exponents(const Word& w, long& ea, long& eb) {
    ea = eb = 0;
    for (Letter l : w) {
        long d = (l & 1) ? -1 : 1;
        ((l & 2) ? eb : ea) += d;
    }
}

Word grid_canonical(const Word& w) {
    long ea, eb;
    grid_exponents(w, ea, eb);
    Word out;
    out.insert(out.end(), std::labs(ea), ea >= 0 ? Letter{0} : Letter{1});
    out.insert(out.end(), std::labs(eb), eb >= 0 ? Letter{2} : Letter{3});
    return out;
}

}  // namespace

Word dehn_shorten(const GroupPresentation& pres, Word w) {
    if (is_grid(pres)) return grid_canonical(w);
    w = free_reduce(std::move(w));
    if (!pres.surface) return w;
    const int bits = pres.bits;
    const int wl = pres.half_len() + 1;
    const Packed mask = (Packed{1} << (bits * wl)) - 1;
    const Packed lift = Packed{1} << (bits * wl);

    bool changed = true;
    while (changed) {
        changed = false;
        if ((int)w.size() < wl) break;
        Packed win = 1;
        for (int j = 0; j < wl - 1; ++j) win = (win << bits) | w[j];
        for (int p = 0; p + wl <= (int)w.size(); ++p) {
            win = (((win << bits) | w[p + wl - 1]) & mask) | lift;
            auto it = pres.dehn_windows.find(win);
            if (it == pres.dehn_windows.end()) continue;
            Word rep = unpack_word(it->second, bits);
            Word next(w.begin(), w.begin() + p);
            next.insert(next.end(), rep.begin(), rep.end());
            next.insert(next.end(), w.begin() + p + wl, w.end());
            w = free_reduce(std::move(next));
            changed = true;
            break;
        }
    }
    return w;
}

bool represents_identity(const GroupPresentation& pres, const Word& w) {
    if (is_grid(pres)) {
        long ea, eb;
        grid_exponents(w, ea, eb);
        return ea == 0 && eb == 0;
    }
    return dehn_shorten(pres, w).empty();
}

bool equal_elements(const GroupPresentation& pres, const Word& a, const Word& b) {
    Word prod = a;
    Word bi = inverse_word(b);
    prod.insert(prod.end(), bi.begin(), bi.end());
    return represents_identity(pres, prod);
}

namespace {

constexpr size_t kClosureCap = 4096;

struct ClosureResult {
    Packed min = 0;
    bool shorter = false;
    Packed shorter_word = 0;  // unvalidated equal element of smaller length
};

// Explores the equal-length words reachable by exchanging half-relator
// windows for their complements.  Flags any exchange that exposes a free
// cancellation or an over-half window: the input was not geodesic.
ClosureResult swap_closure(const GroupPresentation& pres, Packed start,
                           std::vector<Packed>& seen) {
    const int bits = pres.bits;
    const int H = pres.half_len();
    const int len = packed_len(start, bits);
    const Packed hmask = (Packed{1} << (bits * H)) - 1;
    const int wl = H + 1;
    const Packed lmask = (1u << bits) - 1;

    ClosureResult res;
    res.min = start;
    if (!pres.surface || len < H) return res;

    seen.clear();
    seen.push_back(start);
    for (size_t qi = 0; qi < seen.size(); ++qi) {
        Packed w = seen[qi];
        for (int p = 0; p + H <= len; ++p) {
            const int shift = (len - p - H) * bits;
            Packed win = (w >> shift) & hmask;
            auto it = pres.half_windows.find(win | (Packed{1} << (bits * H)));
            if (it == pres.half_windows.end()) continue;
            Packed rep = it->second & hmask;
            if (rep == win) continue;
            Packed nw = w ^ ((win ^ rep) << shift);

            // seams: cancellation against the untouched neighbours
            bool bad = false;
            if (p > 0) {
                Letter before = packed_letter(nw, bits, len, p - 1);
                Letter first = packed_letter(nw, bits, len, p);
                if (before == inverse_letter(first)) bad = true;
            }
            if (!bad && p + H < len) {
                Letter last = packed_letter(nw, bits, len, p + H - 1);
                Letter after = packed_letter(nw, bits, len, p + H);
                if (after == inverse_letter(last)) bad = true;
            }
            // over-half windows overlapping the replaced block
            if (!bad && len >= wl) {
                int lo = std::max(0, p - wl + 1);
                int hi = std::min(len - wl, p + H - 1);
                for (int q = lo; q <= hi && !bad; ++q) {
                    Packed dwin = (nw >> ((len - q - wl) * bits)) & ((Packed{1} << (bits * wl)) - 1);
                    if (pres.dehn_windows.count(dwin | (Packed{1} << (bits * wl)))) bad = true;
                }
            }
            if (bad) {
                res.shorter = true;
                res.shorter_word = nw;
                return res;
            }
            if (std::find(seen.begin(), seen.end(), nw) == seen.end()) {
                if (seen.size() >= kClosureCap)
                    throw std::logic_error("swap_closure: closure cap exceeded");
                seen.push_back(nw);
                if (nw < res.min) res.min = nw;
            }
        }
    }
    (void)lmask;
    return res;
}

thread_local std::vector<Packed> tl_closure;

Packed canonical_packed_impl(const GroupPresentation& pres, Word w) {
    w = dehn_shorten(pres, std::move(w));
    if (is_grid(pres)) return pack_word(w, pres.bits, pres.max_len);
    for (;;) {
        Packed p = pack_word(w, pres.bits, pres.max_len);
        ClosureResult res = swap_closure(pres, p, tl_closure);
        if (!res.shorter) return res.min;
        w = dehn_shorten(pres, free_reduce(unpack_word(res.shorter_word, pres.bits)));
    }
}

}  // namespace

Packed canonical_form(const GroupPresentation& pres, const Word& w) {
    for (Letter l : w)
        if (!pres.valid_letter(l))
            throw std::invalid_argument("canonical_form: unknown letter");
    return canonical_packed_impl(pres, w);
}

Word reduce_dehn(const GroupPresentation& pres, const Word& w) {
    return unpack_word(canonical_form(pres, w), pres.bits);
}

Packed multiply_letter(const GroupPresentation& pres, Packed parent, Letter l) {
    const int bits = pres.bits;
    const int len = packed_len(parent, bits);
    if (len > 0 && (Letter)(parent & ((1u << bits) - 1)) == inverse_letter(l))
        return parent >> bits;
    if (len + 1 > pres.max_len)
        throw std::length_error("multiply_letter: word too long for packed representation");
    Packed w2 = (parent << bits) | l;
    if (!pres.surface) return w2;
    if (is_grid(pres)) return canonical_packed_impl(pres, unpack_word(w2, bits));

    const int wl = pres.half_len() + 1;
    if (len + 1 >= wl) {
        Packed suffix = (w2 & ((Packed{1} << (bits * wl)) - 1)) | (Packed{1} << (bits * wl));
        if (pres.dehn_windows.count(suffix))
            return canonical_packed_impl(pres, unpack_word(w2, bits));
    }
    ClosureResult res = swap_closure(pres, w2, tl_closure);
    if (res.shorter)
        return canonical_packed_impl(pres, unpack_word(w2, bits));
    return res.min;
}

Packed multiply(const GroupPresentation& pres, Packed a, Packed b) {
    Word w = unpack_word(a, pres.bits);
    Word wb = unpack_word(b, pres.bits);
    w.insert(w.end(), wb.begin(), wb.end());
    return canonical_packed_impl(pres, std::move(w));
}

Packed inverse_packed(const GroupPresentation& pres, Packed w) {
    return canonical_packed_impl(pres, inverse_word(unpack_word(w, pres.bits)));
}

}  // namespace rwlab

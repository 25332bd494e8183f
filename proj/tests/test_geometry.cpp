#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rwlab/geometry.hpp"

using namespace rwlab;

namespace {

const GroupPresentation& g2() {
    static auto pres = GroupPresentation::surface_group(2);
    return pres;
}

const CayleyBall& ball6() {
    static auto ball = ball_enumerate(g2(), 6);
    return ball;
}

}  // namespace

TEST_CASE("segments validate geodesy") {
    const auto& pres = g2();
    Word alt;
    for (int i = 0; i < 16; ++i) alt.push_back(i % 2 ? Letter{4} : Letter{0});
    auto geo = make_segment(pres, kEmptyWord, alt);
    CHECK(geo.length() == 16);
    CHECK(geo.vertices.size() == 17);
    CHECK_THROWS_AS(make_segment(pres, kEmptyWord, pres.relator), std::invalid_argument);
    CHECK_THROWS_AS(make_segment(pres, kEmptyWord, Word{0, 1}), std::invalid_argument);
}

TEST_CASE("distance agrees with canonical length") {
    const auto& pres = g2();
    std::mt19937 rng(3);
    for (int t = 0; t < 300; ++t) {
        Word wa, wb;
        for (int i = 0; i < int(rng() % 8); ++i) wa.push_back(Letter(rng() % 8));
        for (int i = 0; i < int(rng() % 8); ++i) wb.push_back(Letter(rng() % 8));
        Packed a = canonical_form(pres, wa), b = canonical_form(pres, wb);
        Word prod = inverse_word(wa);
        prod.insert(prod.end(), wb.begin(), wb.end());
        CHECK(distance(pres, a, b) == (int)reduce_dehn(pres, prod).size());
        CHECK(distance(pres, a, a) == 0);
        CHECK(distance(pres, a, b) == distance(pres, b, a));
    }
}

TEST_CASE("geodesic enumeration: trivial cases") {
    const auto& ball = ball6();
    auto same = geodesics_between(kEmptyWord, kEmptyWord, ball);
    REQUIRE(same.size() == 1);
    CHECK(same[0].length() == 0);

    Packed a1 = canonical_form(g2(), {0});
    auto adj = geodesics_between(kEmptyWord, a1, ball);
    REQUIRE(adj.size() == 1);
    CHECK(adj[0].length() == 1);
    CHECK(adj[0].vertices.back() == a1);

    CHECK_THROWS_AS(geodesics_between(kEmptyWord, pack_word(Word(8, Letter{0}), 3, 21), ball),
                    std::invalid_argument);
}

TEST_CASE("geodesic count matches brute-force path enumeration") {
    const auto& pres = g2();
    const auto& ball = ball6();
    // half of the fundamental relator: endpoints at distance 4 inside a disc
    Word half(pres.relator.begin(), pres.relator.begin() + 4);
    Packed y = canonical_form(pres, half);
    REQUIRE(packed_len(y, pres.bits) == 4);
    auto geos = geodesics_between(kEmptyWord, y, ball);

    int brute = 0;
    Word w(4, Letter{0});
    for (int l0 = 0; l0 < 8; ++l0)
        for (int l1 = 0; l1 < 8; ++l1)
            for (int l2 = 0; l2 < 8; ++l2)
                for (int l3 = 0; l3 < 8; ++l3) {
                    w = {Letter(l0), Letter(l1), Letter(l2), Letter(l3)};
                    if (canonical_form(pres, w) != y) continue;
                    bool geodesicp = true;
                    for (int p = 1; p < 4; ++p)
                        if ((int)reduce_dehn(pres, Word(w.begin(), w.begin() + p)).size() != p)
                            geodesicp = false;
                    if (geodesicp) ++brute;
                }
    CHECK((int)geos.size() == brute);
    CHECK(geos.size() >= 2);  // both relator halves connect the endpoints
    for (const auto& g : geos) {
        CHECK(g.length() == 4);
        CHECK(g.vertices.front() == kEmptyWord);
        CHECK(g.vertices.back() == y);
        for (int i = 0; i < 4; ++i)
            CHECK(multiply_letter(pres, g.vertices[i], g.letters[i]) == g.vertices[i + 1]);
    }
    // translated endpoints give translated geodesics
    Packed x = canonical_form(pres, {2});
    auto shifted = geodesics_between(x, multiply(pres, x, y), ball);
    CHECK(shifted.size() == geos.size());
}

TEST_CASE("free semigroup trees") {
    const auto& pres = g2();
    CHECK(free_semigroup_tree(pres, TreeFamily::APlus, 0).size() == 1);

    auto t = free_semigroup_tree(pres, TreeFamily::APlus, 3);
    CHECK(t.size() == 15);
    std::set<Packed> words;
    for (const auto& n : t) {
        words.insert(n.word);
        Word w = unpack_word(n.word, pres.bits);
        for (Letter l : w) CHECK((l == 0 || l == 4));
        CHECK(w.size() <= 3);
        CHECK(distance(pres, kEmptyWord, n.word) == (int)w.size());
    }
    CHECK(words.size() == 15);

    auto pres3 = GroupPresentation::surface_group(3);
    CHECK(free_semigroup_tree(pres3, TreeFamily::BMinus, 2).size() == 13);

    // rooted translate
    Packed root = canonical_form(pres, {2, 2});
    auto tr = free_semigroup_tree(pres, TreeFamily::AMinus, 2, root);
    CHECK(tr.size() == 7);
    for (const auto& n : tr) CHECK(distance(pres, root, n.word) <= 2);
}

TEST_CASE("cut points: degenerate and alternating segments") {
    const auto& pres = g2();
    auto one = make_segment(pres, kEmptyWord, Word{0});
    CHECK(find_cut_points(one, pres).empty());

    Word alt;
    for (int i = 0; i < 16; ++i) alt.push_back(i % 2 ? Letter{4} : Letter{0});
    auto geo = make_segment(pres, kEmptyWord, alt);
    auto cuts = find_cut_points(geo, pres);
    CHECK((int)cuts.size() >= 16 / 16);
    for (const auto& c : cuts) {
        CHECK(c.index >= 1);
        CHECK(c.index < geo.length());
        CHECK(c.vertex == geo.vertices[c.index]);
    }

    GeodesicSegment bad;
    bad.vertices = {kEmptyWord};
    bad.letters = {};
    bad.vertices.push_back(canonical_form(pres, {0}));
    CHECK_THROWS_AS(find_cut_points(bad, pres), std::invalid_argument);
    CHECK_THROWS_AS(find_cut_points(one, GroupPresentation::surface_group(1)),
                    std::invalid_argument);
}

TEST_CASE("every geodesic passes through a detected cut point") {
    const auto& pres = g2();
    const auto& ball = ball6();
    std::mt19937 rng(17);
    int checked = 0, with_cut = 0;
    for (int t = 0; t < 60; ++t) {
        std::uint64_t lo = ball.sphere_off[5], hi = ball.sphere_off[7];
        Packed y = ball.element(std::uint32_t(lo + rng() % (hi - lo)));
        Word letters = unpack_word(y, pres.bits);
        auto geo = make_segment(pres, kEmptyWord, letters);
        auto cuts = find_cut_points(geo, pres);
        if (cuts.empty()) continue;
        ++with_cut;
        auto geos = geodesics_between(kEmptyWord, y, ball);
        for (const auto& c : cuts)
            for (const auto& g : geos) {
                ++checked;
                CHECK(std::find(g.vertices.begin(), g.vertices.end(), c.vertex) !=
                      g.vertices.end());
            }
    }
    CHECK(with_cut > 10);
    CHECK(checked > 100);
}

TEST_CASE("cut point trees are disjoint from the segment and each other") {
    const auto& pres = g2();
    std::mt19937 rng(29);
    const auto& ball = ball6();
    for (int t = 0; t < 30; ++t) {
        std::uint64_t lo = ball.sphere_off[6], hi = ball.sphere_off[7];
        Packed y = ball.element(std::uint32_t(lo + rng() % (hi - lo)));
        auto geo = make_segment(pres, kEmptyWord, unpack_word(y, pres.bits));
        for (const auto& c : find_cut_points(geo, pres)) {
            auto t_in = free_semigroup_tree(pres, c.fam_in, 2, c.root_in);
            auto t_out = free_semigroup_tree(pres, c.fam_out, 2, c.root_out);
            std::set<Packed> seen(geo.vertices.begin(), geo.vertices.end());
            for (const auto& n : t_in) {
                CHECK(!seen.count(n.word));
                seen.insert(n.word);
            }
            for (const auto& n : t_out) CHECK(!seen.count(n.word));
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>

#include "rwlab/ball.hpp"

using namespace rwlab;

TEST_CASE("ball sphere counts, genus 2") {
    auto pres = GroupPresentation::surface_group(2);
    auto ball = ball_enumerate(pres, 3);
    auto counts = ball.sphere_counts();
    CHECK(counts == std::vector<std::uint64_t>{1, 8, 56, 392});
    CHECK(ball.size() == 457);
    CHECK(ball.element(0) == kEmptyWord);
}

TEST_CASE("adjacency is an involution and stays exact") {
    auto pres = GroupPresentation::surface_group(2);
    auto ball = ball_enumerate(pres, 4);
    const int L = pres.n_letters();
    for (std::uint32_t i = 0; i < ball.size(); ++i) {
        CHECK(ball.index_of(ball.element(i)) == i);
        for (int l = 0; l < L; ++l) {
            std::uint32_t j = ball.neighbor(i, Letter(l));
            Packed prod = multiply_letter(pres, ball.element(i), Letter(l));
            if (j == CayleyBall::kNoNeighbor) {
                CHECK(packed_len(prod, pres.bits) > ball.radius);
            } else {
                CHECK(ball.element(j) == prod);
                CHECK(ball.neighbor(j, inverse_letter(Letter(l))) == i);
            }
        }
    }
}

TEST_CASE("sphere offsets partition by word length") {
    auto pres = GroupPresentation::surface_group(2);
    auto ball = ball_enumerate(pres, 4);
    for (std::uint32_t i = 0; i < ball.size(); ++i)
        CHECK(ball.sphere_of(i) == packed_len(ball.element(i), pres.bits));
    auto series = sphere_count_series(pres, 4);
    CHECK(series == ball.sphere_counts());
}

TEST_CASE("count-only series matches known growth") {
    auto grid = sphere_count_series(GroupPresentation::surface_group(1), 10);
    for (int m = 1; m <= 10; ++m) CHECK(grid[m] == std::uint64_t(4 * m));

    auto free2 = sphere_count_series(GroupPresentation::free_group(2), 6);
    std::uint64_t expect = 1;
    for (int m = 0; m <= 6; ++m) {
        CHECK(free2[m] == expect);
        expect = (m == 0) ? 8 : expect * 7;
    }
    CHECK(fitted_growth(free2) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("memory budget produces a resource error naming the feasible radius") {
    auto pres = GroupPresentation::surface_group(2);
    try {
        ball_enumerate(pres, 6, 1 << 16);
        FAIL("expected ResourceError");
    } catch (const ResourceError& e) {
        CHECK(e.largest_feasible >= 1);
        CHECK(e.largest_feasible < 6);
        CHECK(std::string(e.what()).find(std::to_string(e.largest_feasible)) !=
              std::string::npos);
    }
}

TEST_CASE("ball serialization round trip") {
    auto pres = GroupPresentation::surface_group(2);
    auto ball = ball_enumerate(pres, 3);
    const char* path = "test_ball.rwlb";
    save_ball(ball, path);
    auto back = load_ball(path);
    CHECK(back.radius == ball.radius);
    CHECK(back.pres.genus == 2);
    CHECK(back.pres.surface);
    CHECK(back.elements == ball.elements);
    CHECK(back.adj == ball.adj);
    CHECK(back.sphere_off == ball.sphere_off);

    // corrupt one adjacency byte: checksum must catch it
    {
        std::FILE* f = std::fopen(path, "rb+");
        REQUIRE(f);
        std::fseek(f, -16, SEEK_END);
        unsigned char b;
        REQUIRE(std::fread(&b, 1, 1, f) == 1);
        b ^= 0xff;
        std::fseek(f, -16, SEEK_END);
        REQUIRE(std::fwrite(&b, 1, 1, f) == 1);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(load_ball(path), "load_ball: checksum mismatch", std::runtime_error);

    // truncation
    save_ball(ball, path);
    {
        std::FILE* f = std::fopen(path, "rb");
        REQUIRE(f);
        std::fseek(f, 0, SEEK_END);
        long sz = std::ftell(f);
        std::fclose(f);
        REQUIRE(truncate(path, sz / 2) == 0);
    }
    CHECK_THROWS_AS(load_ball(path), std::runtime_error);

    // wrong magic
    {
        std::FILE* f = std::fopen(path, "wb");
        REQUIRE(f);
        std::fwrite("NOPE", 1, 4, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_ball(path), std::runtime_error);
    std::remove(path);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rwlab/oracle.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef RWLAB_CLI_PATH
#error "RWLAB_CLI_PATH must point at the built binary"
#endif

int run(const std::string& args) {
    std::string cmd = std::string(RWLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path scratch() {
    auto p = fs::temp_directory_path() / "rwlab_cli_test";
    fs::create_directories(p);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("no subcommand and bad flags are usage errors") {
    CHECK(run("") == 2);
    CHECK(run("--bogus-flag") == 2);
    CHECK(run("green --genus 0") == 2);
    CHECK(run("green --config /nonexistent.ini") == 2);
    CHECK(run("brw --mode nonsense --genus 2 --radius 3") == 2);
}

TEST_CASE("oracle table matches the closed forms") {
    auto dir = scratch() / "oracle";
    REQUIRE(run("oracle --group free --genus 1 --r-grid 0:1.15:0.05 --out-dir " + dir.string()) ==
            0);
    auto rows = read_csv(dir / "oracle.csv");
    REQUIRE(rows.size() >= 24);
    CHECK(rows[0] == std::vector<std::string>{"r", "F", "G", "R"});
    for (std::size_t i = 2; i < rows.size(); ++i) {
        double r = std::stod(rows[i][0]);
        auto v = rwlab::covering_oracle(r, 1);
        CHECK(std::stod(rows[i][1]) == doctest::Approx(double(v.F)).epsilon(1e-12));
        CHECK(std::stod(rows[i][2]) == doctest::Approx(double(v.G)).epsilon(1e-12));
    }
    CHECK(fs::exists(dir / "oracle_manifest.json"));
}

TEST_CASE("automaton validation reports exact counts and exits clean") {
    auto dir = scratch() / "autoval";
    REQUIRE(run("automaton-validate --genus 2 --validate-radius 6 --out-dir " + dir.string()) ==
            0);
    auto rows = read_csv(dir / "automaton_validate.csv");
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == rows[i][2]);
        CHECK(rows[i][3] == "1");
    }
}

TEST_CASE("identical config gives byte-identical CSV bodies") {
    auto a = scratch() / "rep_a";
    auto b = scratch() / "rep_b";
    std::string args = "brw --mode plain --genus 2 --radius 3 --r 0.8 --horizon 10 "
                       "--replicas 500 --seed 17 --out-dir ";
    REQUIRE(run(args + a.string()) == 0);
    REQUIRE(run(args + b.string()) == 0);
    for (const char* name : {"brw_tally.csv", "brw_generations.csv"}) {
        std::ifstream fa(a / name), fb(b / name);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(!sa.str().empty());
    }
}

TEST_CASE("ball cache round trips through the CLI") {
    auto dir = scratch() / "cached";
    auto cache = scratch() / "cache";
    std::string args = "green --genus 2 --radius 3 --r 0.9 --horizon 50 --cache-dir " +
                       cache.string() + " --out-dir ";
    REQUIRE(run(args + (dir / "one").string()) == 0);
    CHECK(fs::exists(cache / "ball_surface2_3.rwb"));
    REQUIRE(run(args + (dir / "two").string()) == 0);  // second run loads the cache
    auto one = read_csv(dir / "one" / "green_sphere_sums.csv");
    auto two = read_csv(dir / "two" / "green_sphere_sums.csv");
    CHECK(one == two);
}

TEST_CASE("config file values apply with flag precedence") {
    auto dir = scratch() / "cfg";
    auto cfg = scratch() / "run.ini";
    {
        std::ofstream f(cfg);
        f << "group=free\ngenus=1\nradius=4\nr=0.5\nhorizon=60\n";
    }
    REQUIRE(run("green --config " + cfg.string() + " --out-dir " + (dir / "base").string()) == 0);
    REQUIRE(run("green --config " + cfg.string() + " --r 0.25 --out-dir " +
                (dir / "override").string()) == 0);
    auto base = read_csv(dir / "base" / "green_sphere_sums.csv");
    auto over = read_csv(dir / "override" / "green_sphere_sums.csv");
    CHECK(base != over);
    CHECK(base.size() == over.size());
}

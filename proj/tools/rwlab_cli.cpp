// Command-line front end: per-module subcommands plus named experiments that
// write CSV tables, JSON diagnostics, and a run manifest.  All outputs are
// deterministic under a fixed seed; CSV bodies carry no timestamps.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rwlab/automaton.hpp"
#include "rwlab/ball.hpp"
#include "rwlab/brw.hpp"
#include "rwlab/fit.hpp"
#include "rwlab/green.hpp"
#include "rwlab/group.hpp"
#include "rwlab/oracle.hpp"
#include "rwlab/thermo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rwlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

const std::map<std::string, std::string> kModuleVersions = {
    {"group_core", "1.0"},  {"free_oracle", "1.0"}, {"green_engine", "1.0"},
    {"brw_sim", "1.0"},     {"geodesic_automaton", "1.0"}, {"thermo", "1.0"},
    {"cli", "1.0"},
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_ld(long double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.21Lg", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    // "start:stop:step" inclusive, or a comma list.
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a, b, s;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || s <= 0)
            throw CLI::ValidationError("grid", "expected start:stop:step with step > 0");
        for (double v = a; v <= b + 1e-12 * s; v += s) out.push_back(v);
        return out;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
    return out;
}

Word parse_word(const std::string& spec) {
    // Tokens like a1 b2 A1 B2 (capital = inverse), space or comma separated.
    Word w;
    std::stringstream ss(spec);
    std::string tok;
    while (ss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.size() < 2) throw CLI::ValidationError("word", "bad token " + tok);
        char c = tok[0];
        int pair = std::stoi(tok.substr(1)) - 1;
        int off;
        switch (c) {
            case 'a': off = 0; break;
            case 'A': off = 1; break;
            case 'b': off = 2; break;
            case 'B': off = 3; break;
            default: throw CLI::ValidationError("word", "bad token " + tok);
        }
        if (pair < 0) throw CLI::ValidationError("word", "bad token " + tok);
        w.push_back(static_cast<Letter>(4 * pair + off));
    }
    return w;
}

std::string spell(const GroupPresentation& pres, Packed p) {
    static const char* kNames = "aAbB";
    Word w = unpack_word(p, pres.bits);
    std::string s;
    for (Letter l : w) {
        if (!s.empty()) s += ' ';
        s += kNames[l % 4];
        s += std::to_string(l / 4 + 1);
    }
    return s.empty() ? "e" : s;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

struct Options {
    std::string group = "surface";
    int genus = 2;
    int radius = 5;
    double r = 1.0;
    int horizon = 300;
    double rho = 0;  // 0 = choose automatically
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "out";
    std::string cache_dir;
    std::uint64_t mem_budget_gb = 4;

    json echo() const {
        return json{{"group", group},     {"genus", genus},   {"radius", radius},
                    {"r", r},             {"horizon", horizon}, {"rho", rho},
                    {"seed", seed},       {"threads", threads}, {"out_dir", out_dir},
                    {"cache_dir", cache_dir}, {"mem_budget_gb", mem_budget_gb}};
    }

    GroupPresentation presentation() const {
        return group == "free" ? GroupPresentation::free_group(genus)
                               : GroupPresentation::surface_group(genus);
    }
};

// Manifest collected over a run: config echo and hash, versions, stage
// timings, certificate summaries, and the inventory of files written.
struct Manifest {
    json j;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    fs::path out_dir;

    Manifest(const std::string& name, const Options& opt, const json& extra_config) {
        j["experiment"] = name;
        j["config"] = opt.echo();
        for (auto& [k, v] : extra_config.items()) j["config"][k] = v;
        j["config_hash"] = fnv1a(j["config"].dump());
        j["module_versions"] = kModuleVersions;
        j["files"] = json::array();
        j["certificates"] = json::object();
        j["timing_ms"] = json::object();
        j["flags"] = json::object();
        out_dir = opt.out_dir;
        fs::create_directories(out_dir);
    }

    void stage(const std::string& name) {
        auto now = std::chrono::steady_clock::now();
        j["timing_ms"][name] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - t0).count();
        t0 = now;
    }

    fs::path file(const std::string& name) { return out_dir / name; }

    void record(const fs::path& p) {
        j["files"].push_back({{"path", p.string()}, {"bytes", fs::file_size(p)}});
    }

    void write(const std::string& name) {
        auto p = out_dir / name;
        std::ofstream f(p);
        f << j.dump(2) << "\n";
        std::fprintf(stdout, "manifest: %s\n", p.string().c_str());
    }
};

void write_csv(Manifest& m, const std::string& name, const std::string& header,
               const std::vector<std::string>& rows) {
    auto p = m.file(name);
    std::ofstream f(p);
    f << header << "\n";
    for (const auto& row : rows) f << row << "\n";
    f.close();
    m.record(p);
}

void write_json(Manifest& m, const std::string& name, const json& j) {
    auto p = m.file(name);
    std::ofstream f(p);
    f << j.dump(2) << "\n";
    f.close();
    m.record(p);
}

const CayleyBall& get_ball(const Options& opt, Manifest& m) {
    static std::map<std::string, CayleyBall> cache;
    std::string key = opt.group + std::to_string(opt.genus) + "_" + std::to_string(opt.radius);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (!opt.cache_dir.empty()) {
        fs::path p = fs::path(opt.cache_dir) / ("ball_" + key + ".rwb");
        if (fs::exists(p)) {
            auto [pos, ok] = cache.emplace(key, load_ball(p.string()));
            m.stage("ball_load");
            return pos->second;
        }
        auto [pos, ok] = cache.emplace(
            key, ball_enumerate(opt.presentation(), opt.radius, opt.mem_budget_gb << 30));
        fs::create_directories(opt.cache_dir);
        save_ball(pos->second, p.string());
        m.stage("ball_build");
        return pos->second;
    }
    auto [pos, ok] = cache.emplace(
        key, ball_enumerate(opt.presentation(), opt.radius, opt.mem_budget_gb << 30));
    m.stage("ball_build");
    return pos->second;
}

double pick_rho(const Options& opt, const CayleyBall& ball, Manifest& m) {
    if (opt.rho > 0) {
        m.j["certificates"]["rho_upper"] = {{"value", opt.rho}, {"source", "flag"}};
        return opt.rho;
    }
    if (opt.group == "free") {
        double rho = std::sqrt(4.0 * opt.genus - 1.0) / (2.0 * opt.genus);
        m.j["certificates"]["rho_upper"] = {{"value", rho}, {"source", "tree closed form"}};
        return rho;
    }
    try {
        double rho = certified_rho_upper(ball);
        m.j["certificates"]["rho_upper"] = {{"value", rho}, {"source", "pattern certificate"}};
        return rho;
    } catch (const PatternError& e) {
        // No certificate available on this ball; fall back to the trivial
        // bound and disclose that truncation tails are uncertified.
        m.j["certificates"]["rho_upper"] = {
            {"value", 1.0}, {"source", "trivial bound"}, {"note", e.what()}};
        return 1.0;
    }
}

struct FieldKey {
    std::string k;
};

const GreenField& get_field(const Options& opt, const CayleyBall& ball, double rho, Manifest& m) {
    static std::map<std::string, GreenField> cache;
    std::string key = opt.group + std::to_string(opt.genus) + "_" + std::to_string(opt.radius) +
                      "_" + fmt(opt.r) + "_" + std::to_string(opt.horizon) + "_" + fmt(rho);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, green_field(ball, opt.r, opt.horizon, rho)).first;
        m.stage("green_field");
    }
    m.j["certificates"]["field_" + fmt(opt.r)] = {{"certified", it->second.certified},
                                                  {"tail_bound", it->second.tail_bound},
                                                  {"leak_weighted", it->second.leak_weighted}};
    return it->second;
}

// ---------------------------------------------------------------- commands

int cmd_oracle(const Options& opt, const std::string& grid) {
    Manifest m("oracle", opt, {{"r_grid", grid}});
    std::vector<std::string> rows;
    for (double r : parse_grid(grid)) {
        OracleValues v;
        if (r == 0)
            v = OracleValues{0.0L, 1.0L, covering_R(opt.genus)};  // empty-path series only
        else
            v = covering_oracle(r, opt.genus);
        rows.push_back(fmt(r) + "," + fmt_ld(v.F) + "," + fmt_ld(v.G) + "," + fmt_ld(v.R));
    }
    write_csv(m, "oracle.csv", "r,F,G,R", rows);
    m.stage("oracle");
    m.write("oracle_manifest.json");
    return kExitOk;
}

int cmd_green(const Options& opt) {
    Manifest m("green", opt, {});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    const auto& field = get_field(opt, ball, rho, m);
    std::vector<std::string> rows;
    auto counts = ball.sphere_counts();
    for (int s = 0; s <= ball.radius; ++s) {
        double sum1 = 0, sum2 = 0;
        for (auto i = ball.sphere_off[s]; i < ball.sphere_off[s + 1]; ++i) {
            sum1 += field.values[i];
            sum2 += field.values[i] * field.values[i];
        }
        rows.push_back(std::to_string(s) + "," + std::to_string(counts[s]) + "," + fmt(sum1) +
                       "," + fmt(sum2));
    }
    write_csv(m, "green_sphere_sums.csv", "m,count,sum_G,sum_G2", rows);
    write_json(m, "green_summary.json",
               {{"r", opt.r},
                {"G_origin", field.origin()},
                {"certified", field.certified},
                {"tail_bound", field.tail_bound},
                {"leak_weighted", field.leak_weighted}});
    m.stage("tables");
    m.write("green_manifest.json");
    return kExitOk;
}

int cmd_spectral(const Options& opt) {
    Manifest m("spectral-radius", opt, {});
    const auto& ball = get_ball(opt, m);
    auto est = spectral_radius(ball);
    m.stage("spectral");
    json j = {{"estimate", est.estimate},
              {"lower", est.lower},
              {"upper", est.upper},
              {"ratio_upper", est.ratio_upper},
              {"subseq_upper", est.subseq_upper},
              {"covering_upper", est.covering_upper},
              {"dirichlet_value", est.dirichlet_value},
              {"zuk_gate", est.zuk_gate},
              {"pattern_radius", est.pattern_radius},
              {"n_types", est.n_types}};
    write_json(m, "spectral.json", j);
    m.j["certificates"]["spectral_bracket"] = {{"lower", est.lower}, {"upper", est.upper}};
    m.write("spectral_manifest.json");
    std::fprintf(stdout, "R in [%s, %s], zuk_gate=%d\n", fmt(est.lower).c_str(),
                 fmt(est.upper).c_str(), (int)est.zuk_gate);
    return est.lower <= 0 ? kExitViolation : kExitOk;
}

int cmd_ancona(const Options& opt, const std::string& grid, int samples) {
    Manifest m("ancona-scan", opt, {{"r_grid", grid}, {"samples", samples}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    auto scan = ancona_scan(ball, parse_grid(grid), opt.horizon, rho, samples, opt.seed);
    m.stage("scan");
    std::vector<std::string> rows;
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < scan.r_grid.size(); ++i) {
        rows.push_back(fmt(scan.r_grid[i]) + "," + fmt(scan.c_hat[i]));
        lo = std::min(lo, scan.c_hat[i]);
        hi = std::max(hi, scan.c_hat[i]);
    }
    write_csv(m, "ancona.csv", "r,c_hat", rows);
    write_json(m, "ancona_summary.json",
               {{"min_c_hat", lo}, {"max_c_hat", hi}, {"spread", hi / lo}, {"samples", samples}});
    m.write("ancona_manifest.json");
    std::fprintf(stdout, "c_hat spread %s over %zu grid points\n", fmt(hi / lo).c_str(),
                 scan.r_grid.size());
    return kExitOk;
}

int cmd_inequalities(const Options& opt) {
    Manifest m("inequalities", opt, {});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    auto rep = inequality_suite(ball, opt.r, opt.horizon, rho, opt.seed);
    m.stage("suite");
    json j = {{"r", rep.r},
              {"n_probes", rep.probes.size()},
              {"supermult_min_margin", rep.supermult_min_margin},
              {"harnack_C", rep.harnack_C},
              {"certificate", rep.certificate},
              {"all_within_certificate", rep.all_within_certificate}};
    write_json(m, "inequalities.json", j);
    m.j["certificates"]["inequality_suite"] = rep.certificate;
    m.write("inequalities_manifest.json");
    if (!rep.all_within_certificate) {
        std::fprintf(stderr, "certified inequality violation at r=%s\n", fmt(opt.r).c_str());
        return kExitViolation;
    }
    return kExitOk;
}

int cmd_exponent(const Options& opt, const std::string& delta_grid) {
    Manifest m("exponent", opt, {{"delta_grid", delta_grid}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    double r_hat = 1.0 / rho;
    auto fit = eta_and_exponent(ball, r_hat, parse_grid(delta_grid), opt.horizon, rho);
    m.stage("fit");
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < fit.delta.size(); ++i)
        rows.push_back(fmt(fit.delta[i]) + "," + fmt(fit.eta[i]));
    write_csv(m, "eta.csv", "delta,eta", rows);
    write_json(m, "exponent.json",
               {{"r_hat", r_hat},
                {"slope_plain", fit.slope_plain},
                {"slope_corrected", fit.slope_corrected},
                {"n_certified", fit.n_certified}});
    m.write("exponent_manifest.json");
    std::fprintf(stdout, "slope_plain=%s slope_corrected=%s\n", fmt(fit.slope_plain).c_str(),
                 fmt(fit.slope_corrected).c_str());
    return kExitOk;
}

int cmd_automaton(const Options& opt, int K, int validate_radius, bool emit_dot) {
    Manifest m("automaton", opt, {{"K", K}, {"validate_radius", validate_radius}});
    auto aut = build_automaton(opt.presentation(), K, validate_radius);
    m.stage("build");
    for (std::size_t mm = 0; mm < aut.cert.path_counts.size(); ++mm)
        std::fprintf(stdout, "radius %zu: paths=%" PRIu64 " sphere=%" PRIu64 " %s\n", mm,
                     aut.cert.path_counts[mm], aut.cert.sphere_counts[mm],
                     aut.cert.path_counts[mm] == aut.cert.sphere_counts[mm] ? "exact" : "MISMATCH");
    const RecurrentClass* rc_ptr = nullptr;
    RecurrentClass rc;
    json extra;
    try {
        rc = recurrent_class(aut);
        rc_ptr = &rc;
    } catch (const AutomatonError& e) {
        extra["recurrent_class_error"] = e.what();
    }
    json j = automaton_to_json(aut, rc_ptr);
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_json(m, "automaton.json", j);
    if (emit_dot) {
        auto p = m.file("automaton.dot");
        std::ofstream f(p);
        f << automaton_to_dot(aut, rc_ptr);
        f.close();
        m.record(p);
    }
    m.j["certificates"]["counts_match"] = aut.cert.counts_match;
    m.write("automaton_manifest.json");
    return aut.cert.counts_match ? kExitOk : kExitViolation;
}

int cmd_pressure(const Options& opt, double theta, int m_lo, int m_hi) {
    Manifest m("pressure", opt, {{"theta", theta}, {"m_lo", m_lo}, {"m_hi", m_hi}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    const auto& field = get_field(opt, ball, rho, m);
    auto est = pressure(field, theta, m_lo, m_hi);
    m.stage("pressure");
    std::vector<std::string> rows;
    for (std::size_t mm = 0; mm < est.log_sums.size(); ++mm)
        rows.push_back(std::to_string(mm) + "," + fmt(est.log_sums[mm]));
    write_csv(m, "pressure.csv", "m,log_sum", rows);
    json j = {{"theta", theta}, {"r", opt.r},       {"slope", est.slope},
              {"intercept", est.intercept}, {"residual", est.residual}};
    if (opt.group == "free") j["closed_form_slope"] = covering_pressure_slope(opt.genus, opt.r, theta);
    write_json(m, "pressure_summary.json", j);
    m.write("pressure_manifest.json");
    std::fprintf(stdout, "pressure slope %s (residual %s)\n", fmt(est.slope).c_str(),
                 fmt(est.residual).c_str());
    return kExitOk;
}

int cmd_levels(const Options& opt, int decades, int per_decade) {
    Manifest m("levels", opt, {{"decades", decades}, {"per_decade", per_decade}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    const auto& field = get_field(opt, ball, rho, m);
    double top = 0;
    for (std::size_t i = 1; i < field.values.size(); ++i) top = std::max(top, field.values[i]);
    std::vector<double> grid;
    for (int k = 0; k <= decades * per_decade; ++k)
        grid.push_back(0.9 * top * std::pow(10.0, -double(k) / per_decade));
    auto lv = level_set_count(field, grid);
    m.stage("levels");
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < lv.eps.size(); ++i)
        rows.push_back(fmt(lv.eps[i]) + "," + std::to_string(lv.counts[i]) + "," +
                       std::to_string(int(lv.usable[i])));
    write_csv(m, "levels.csv", "eps,count,usable", rows);
    write_json(m, "levels_summary.json",
               {{"floor", lv.floor}, {"slope", lv.slope}, {"residual", lv.residual}});
    m.j["certificates"]["level_floor"] = lv.floor;
    m.write("levels_manifest.json");
    std::fprintf(stdout, "level-set slope %s (floor %s)\n", fmt(lv.slope).c_str(),
                 fmt(lv.floor).c_str());
    return kExitOk;
}

int cmd_martin(const Options& opt, const std::string& x_spec, int ray_length) {
    Manifest m("martin", opt, {{"x", x_spec}, {"ray_length", ray_length}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    const auto& field = get_field(opt, ball, rho, m);
    auto aut = build_automaton(opt.presentation(), 0, std::min(opt.radius, 6));
    auto ray = automaton_ray(aut, ray_length, opt.seed);
    Packed x = x_spec.empty() ? ray[0] : canonical_form(ball.pres, parse_word(x_spec));
    auto mk = martin_kernel(field, x, ray);
    m.stage("martin");
    std::vector<std::string> rows;
    for (std::size_t n = 0; n < mk.ratios.size(); ++n)
        rows.push_back(std::to_string(n) + "," + spell(ball.pres, ray[n]) + "," +
                       fmt(mk.ratios[n]));
    write_csv(m, "martin.csv", "n,y_n,ratio", rows);
    write_json(m, "martin_summary.json",
               {{"x", spell(ball.pres, x)}, {"limit", mk.limit}, {"rate", mk.rate},
                {"usable", mk.usable}});
    m.write("martin_manifest.json");
    return kExitOk;
}

int cmd_ergodic(const Options& opt, const std::string& ms_spec, int samples) {
    Manifest m("ergodic-avg", opt, {{"ms", ms_spec}, {"samples", samples}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    const auto& field = get_field(opt, ball, rho, m);
    std::vector<int> ms;
    for (double v : parse_grid(ms_spec)) ms.push_back(int(v));
    auto rep = geodesic_average_stability(field, ms, samples, opt.seed);
    m.stage("ergodic");
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < rep.ms.size(); ++i)
        rows.push_back(std::to_string(rep.ms[i]) + "," + fmt(rep.median[i]) + "," +
                       fmt(rep.dispersion[i]));
    write_csv(m, "ergodic.csv", "m,median,iqr_over_median", rows);
    write_json(m, "ergodic_summary.json",
               {{"stabilized_mean", rep.stabilized_mean}, {"samples", rep.samples},
                {"seed", rep.seed}});
    m.write("ergodic_manifest.json");
    return kExitOk;
}

int cmd_brw(const Options& opt, const std::string& mode, double epsilon, int kmax,
            std::uint64_t replicas, double delta) {
    Manifest m("brw", opt,
               {{"mode", mode}, {"epsilon", epsilon}, {"kmax", kmax}, {"replicas", replicas},
                {"delta", delta}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    if (mode == "plain") {
        BRWConfig cfg{opt.r, opt.horizon, 10'000'000, replicas, opt.seed};
        auto t = simulate_brw(cfg, ball);
        m.stage("simulate");
        std::vector<std::string> rows;
        for (std::size_t i = 0; i < t.mean.size(); ++i)
            if (t.mean[i] > 0)
                rows.push_back(std::to_string(i) + "," + spell(ball.pres, ball.elements[i]) +
                               "," + fmt(t.mean[i]) + "," + fmt(t.se[i]));
        write_csv(m, "brw_tally.csv", "site,word,mean,se", rows);
        std::vector<std::string> gens;
        for (std::size_t n = 0; n < t.generation_mean.size(); ++n)
            gens.push_back(std::to_string(n) + "," + fmt(t.generation_mean[n]) + "," +
                           fmt(t.generation_se[n]));
        write_csv(m, "brw_generations.csv", "generation,mean_size,se", gens);
        m.j["flags"]["truncated"] = t.truncated;
        if (t.truncated) m.j["flags"]["truncated_generation"] = t.truncated_generation;
        m.write("brw_manifest.json");
        return kExitOk;
    }
    if (mode == "colored") {
        ColoredBRWConfig cfg{opt.r, epsilon, kmax, opt.horizon, 10'000'000, replicas, opt.seed};
        auto t = colored_vk_mc(cfg, ball);
        m.stage("simulate");
        std::vector<std::string> rows;
        for (std::size_t i = 0; i < t.mean[0].size(); ++i) {
            bool any = false;
            for (int k = 0; k <= kmax; ++k) any = any || t.mean[k][i] > 0;
            if (!any) continue;
            std::string row = std::to_string(i) + "," + spell(ball.pres, ball.elements[i]);
            for (int k = 0; k <= kmax; ++k)
                row += "," + fmt(t.mean[k][i]) + "," + fmt(t.se[k][i]);
            rows.push_back(row);
        }
        std::string header = "site,word";
        for (int k = 0; k <= kmax; ++k)
            header += ",mean_c" + std::to_string(k) + ",se_c" + std::to_string(k);
        write_csv(m, "brw_colored.csv", header, rows);
        m.j["flags"]["truncated"] = t.truncated;
        m.write("brw_manifest.json");
        return kExitOk;
    }
    if (mode == "snapback") {
        const auto& field = get_field(opt, ball, rho, m);
        auto sb = snapback_ratios(delta, kmax, ball, field);
        m.stage("snapback");
        std::vector<std::string> rows;
        for (std::size_t k = 0; k < sb.H.size(); ++k)
            rows.push_back(std::to_string(k + 1) + "," + fmt(sb.H[k]) + "," +
                           (k + 1 < sb.H.size() ? fmt(sb.ratios[k]) : std::string("")));
        write_csv(m, "snapback.csv", "k,H_k,ratio_to_next", rows);
        m.write("brw_manifest.json");
        return kExitOk;
    }
    throw CLI::ValidationError("--mode", "expected plain, colored, or snapback");
}

// ------------------------------------------------------------- experiments

int exp_oracle_table(const Options& opt, const std::string& grid) { return cmd_oracle(opt, grid); }

int exp_automaton_validate(const Options& opt, int validate_radius) {
    Manifest m("automaton-validate", opt, {{"validate_radius", validate_radius}});
    auto aut = build_automaton(opt.presentation(), 0, 6);
    m.stage("build");
    auto paths = automaton_path_counts(aut, validate_radius);
    std::vector<std::uint64_t> spheres;
    bool overrun = false;
    try {
        spheres = sphere_count_series(opt.presentation(), validate_radius,
                                      opt.mem_budget_gb << 30);
    } catch (const ResourceError& e) {
        overrun = true;
        m.j["flags"]["resource_overrun"] = e.what();
        m.j["flags"]["largest_feasible_radius"] = e.largest_feasible;
        spheres = sphere_count_series(opt.presentation(), e.largest_feasible,
                                      opt.mem_budget_gb << 30);
    }
    m.stage("bfs");
    bool all = true;
    std::vector<std::string> rows;
    for (std::size_t mm = 0; mm < spheres.size(); ++mm) {
        bool ok = paths[mm] == spheres[mm];
        all = all && ok;
        std::fprintf(stdout, "radius %zu: paths=%" PRIu64 " sphere=%" PRIu64 " %s\n", mm,
                     paths[mm], spheres[mm], ok ? "exact" : "MISMATCH");
        rows.push_back(std::to_string(mm) + "," + std::to_string(paths[mm]) + "," +
                       std::to_string(spheres[mm]) + "," + std::to_string(int(ok)));
    }
    write_csv(m, "automaton_validate.csv", "m,path_count,sphere_count,exact", rows);
    m.j["certificates"]["counts_match"] = all;
    m.write("automaton_validate_manifest.json");
    if (!all) return kExitViolation;
    return kExitOk;  // overrun leaves partial results with a flagged manifest
}

int exp_decay_fit(const Options& opt) {
    // Exponential-decay fit of log sum_{S_m} G^2 at the certified edge of
    // the convergence radius.
    Manifest m("decay-fit", opt, {});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    Options o = opt;
    o.r = 1.0 / rho;
    const auto& field = get_field(o, ball, rho, m);
    auto est = pressure(field, 2.0, 2, ball.radius - 1);
    m.stage("fit");
    std::vector<std::string> rows;
    for (std::size_t mm = 0; mm < est.log_sums.size(); ++mm)
        rows.push_back(std::to_string(mm) + "," + fmt(est.log_sums[mm]));
    write_csv(m, "decay.csv", "m,log_sum_G2", rows);
    write_json(m, "decay_summary.json",
               {{"r", o.r}, {"slope", est.slope}, {"residual", est.residual}});
    m.write("decay_fit_manifest.json");
    std::fprintf(stdout, "decay slope %s at r=%s\n", fmt(est.slope).c_str(), fmt(o.r).c_str());
    return kExitOk;
}

int exp_sphere_sums(const Options& opt, const std::string& grid) {
    Manifest m("sphere-sums", opt, {{"r_grid", grid}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    std::vector<std::string> rows;
    for (double r : parse_grid(grid)) {
        Options o = opt;
        o.r = r;
        const auto& field = get_field(o, ball, rho, m);
        for (int s = 0; s <= ball.radius; ++s) {
            double sum1 = 0, sum2 = 0;
            for (auto i = ball.sphere_off[s]; i < ball.sphere_off[s + 1]; ++i) {
                sum1 += field.values[i];
                sum2 += field.values[i] * field.values[i];
            }
            rows.push_back(fmt(r) + "," + std::to_string(s) + "," + fmt(sum1) + "," + fmt(sum2));
        }
    }
    write_csv(m, "sphere_sums.csv", "r,m,sum_G,sum_G2", rows);
    m.write("sphere_sums_manifest.json");
    return kExitOk;
}

int exp_pressure_zero(const Options& opt) {
    // Flatness of sum_{S_m} G^2 at the certified convergence edge, decay at
    // 0.8 of it, and theta=1 growth at least r^m.
    Manifest m("pressure-zero", opt, {});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    double r_hat = 1.0 / rho;
    json verdicts;
    bool ok = true;

    Options oa = opt;
    oa.r = r_hat;
    const auto& fa = get_field(oa, ball, rho, m);
    int m_lo = std::min(5, ball.radius - 2), m_hi = std::min(9, ball.radius);
    double lo = 1e300, hi = 0;
    for (int s = m_lo; s <= m_hi; ++s) {
        double sum2 = 0;
        for (auto i = ball.sphere_off[s]; i < ball.sphere_off[s + 1]; ++i)
            sum2 += fa.values[i] * fa.values[i];
        lo = std::min(lo, sum2);
        hi = std::max(hi, sum2);
    }
    verdicts["flatness"] = {{"m_lo", m_lo}, {"m_hi", m_hi}, {"variation", hi / lo - 1.0},
                            {"pass", hi / lo - 1.0 < 0.30}};
    ok = ok && (hi / lo - 1.0 < 0.30);

    Options ob = opt;
    ob.r = 0.8 * r_hat;
    const auto& fb = get_field(ob, ball, rho, m);
    auto decay = pressure(fb, 2.0, 2, ball.radius - 1);
    verdicts["decay_below"] = {{"r", ob.r}, {"slope", decay.slope}, {"pass", decay.slope < 0}};
    ok = ok && decay.slope < 0;

    auto grow = pressure(fa, 1.0, 2, ball.radius - 1);
    bool grows = true;
    for (std::size_t mm = 1; mm < grow.log_sums.size(); ++mm)
        grows = grows && grow.log_sums[mm] >= mm * std::log(r_hat) - 1e-9;
    verdicts["theta1_growth"] = {{"r", r_hat}, {"pass", grows}};
    ok = ok && grows;

    m.stage("checks");
    write_json(m, "pressure_zero.json", verdicts);
    m.write("pressure_zero_manifest.json");
    std::fprintf(stdout, "pressure-zero checks %s\n", ok ? "pass" : "FAIL");
    return ok ? kExitOk : kExitViolation;
}

int exp_critical_exponent(const Options& opt) {
    Manifest m("critical-exponent", opt, {});
    // Exact branch: closed-form gap on the covering tree.
    long double R = covering_R(opt.genus);
    std::vector<double> deltas, gaps;
    long double GR = covering_oracle(R, opt.genus).G;
    for (int k = 0; k < 24; ++k) {
        long double d = 1e-4L * std::pow(10.0L, k / 11.5L);  // spans [1e-4, 1e-2]
        if (d > 1e-2L) break;
        long double g = covering_oracle(R - d, opt.genus).G;
        deltas.push_back(double(d));
        gaps.push_back(double(GR - g));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        lx.push_back(std::log(deltas[i]));
        ly.push_back(std::log(gaps[i]));
    }
    auto fit = ols(lx, ly);
    m.stage("exact");
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        rows.push_back(fmt(deltas[i]) + "," + fmt(gaps[i]));
    write_csv(m, "exact_gap.csv", "delta,gap", rows);

    // Property branch: eta fit on the surface ball.
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    double r_hat = 1.0 / rho;
    std::vector<double> dg;
    for (int k = 0; k < 10; ++k) dg.push_back(0.002 + 0.004 * k);
    auto efit = eta_and_exponent(ball, r_hat, dg, opt.horizon, rho);
    m.stage("eta");
    std::vector<std::string> erows;
    for (std::size_t i = 0; i < efit.delta.size(); ++i)
        erows.push_back(fmt(efit.delta[i]) + "," + fmt(efit.eta[i]));
    write_csv(m, "eta.csv", "delta,eta", erows);
    write_json(m, "critical_exponent.json",
               {{"exact_slope", fit.slope},
                {"exact_residual", fit.rms_residual},
                {"eta_slope_plain", efit.slope_plain},
                {"eta_slope_corrected", efit.slope_corrected},
                {"n_certified", efit.n_certified}});
    m.write("critical_exponent_manifest.json");
    std::fprintf(stdout, "exact slope %s, eta slope %s\n", fmt(fit.slope).c_str(),
                 fmt(efit.slope_plain).c_str());
    return kExitOk;
}

int exp_brw_verify(const Options& opt, std::uint64_t replicas) {
    Manifest m("brw-verify", opt, {{"replicas", replicas}});
    const auto& ball = get_ball(opt, m);
    double rho = pick_rho(opt, ball, m);
    json verdicts;
    bool ok = true;

    Options o1 = opt;
    o1.r = 1.0;
    o1.horizon = 20;
    const auto& f1 = get_field(o1, ball, rho, m);
    BRWConfig pc{1.0, 20, 10'000'000, replicas, opt.seed};
    auto pt = simulate_brw(pc, ball);
    double dev = std::abs(pt.mean[0] - f1.origin()) / pt.se[0];
    verdicts["plain_origin"] = {{"mc", pt.mean[0]}, {"exact", f1.origin()}, {"dev_se", dev},
                                {"pass", dev < 3}};
    ok = ok && dev < 3;
    m.stage("plain");

    Options o2 = opt;
    o2.r = std::min(1.0 / rho, 1.4920);
    o2.horizon = 400;
    const auto& f2 = get_field(o2, ball, rho, m);
    auto ex = colored_vk_exact(0.05, 2, ball, f2);
    ColoredBRWConfig cc{o2.r, 0.05, 2, 400, 10'000'000, replicas, opt.seed};
    auto ct = colored_vk_mc(cc, ball);
    for (int k = 0; k <= 2; ++k) {
        double d = std::abs(ct.mean[k][0] - ex.vk[k][0]) / ct.se[k][0];
        verdicts["colored_k" + std::to_string(k)] = {
            {"mc", ct.mean[k][0]}, {"exact", ex.vk[k][0]}, {"dev_se", d}, {"pass", d < 3}};
        ok = ok && d < 3;
    }
    m.stage("colored");
    write_json(m, "brw_verify.json", verdicts);
    m.write("brw_verify_manifest.json");
    std::fprintf(stdout, "brw-verify %s\n", ok ? "pass" : "FAIL");
    return ok ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk lab: Green functions, automata, pressure, and "
                 "branching-walk experiments on surface and free groups"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config")
        ->description("config file (flags take precedence)")
        ->check(CLI::ExistingFile);

    Options opt;
    app.add_option("--group", opt.group, "surface or free")
        ->check(CLI::IsMember({"surface", "free"}));
    app.add_option("--genus", opt.genus, "genus / rank parameter")->check(CLI::PositiveNumber);
    app.add_option("--radius", opt.radius, "ball radius");
    app.add_option("--r", opt.r, "Green argument r");
    app.add_option("--horizon", opt.horizon, "series horizon");
    app.add_option("--rho", opt.rho, "override spectral-radius upper bound");
    app.add_option("--seed", opt.seed, "master seed");
    app.add_option("--threads", opt.threads, "thread budget (modules are serial today)");
    app.add_option("--out-dir", opt.out_dir, "artifact directory");
    app.add_option("--cache-dir", opt.cache_dir, "ball cache directory");
    app.add_option("--mem-budget-gb", opt.mem_budget_gb, "enumeration memory budget");

    std::string grid = "0.1:1.4:0.1", delta_grid = "0.002:0.04:0.004";
    std::string mode = "plain", x_spec, ms_spec = "2,3,4,5";
    double theta = 2.0, epsilon = 0.05, delta = 0.01;
    int K = 0, validate_radius = 6, m_lo = 2, m_hi = 0, samples = 200, kmax = 2;
    int decades = 3, per_decade = 4, ray_length = 6;
    std::uint64_t replicas = 10000;

    auto* oracle = app.add_subcommand("oracle", "closed-form covering-walk table");
    oracle->add_option("--r-grid", grid);
    auto* green = app.add_subcommand("green", "Green field and sphere sums");
    auto* spectral = app.add_subcommand("spectral-radius", "bracketed spectral radius");
    auto* ancona = app.add_subcommand("ancona-scan", "relative Ancona constant over r");
    ancona->add_option("--r-grid", grid);
    ancona->add_option("--samples", samples);
    auto* ineq = app.add_subcommand("inequalities", "certified inequality suite");
    auto* exponent = app.add_subcommand("exponent", "eta and critical-exponent fits");
    exponent->add_option("--delta-grid", delta_grid);
    auto* automaton = app.add_subcommand("automaton", "geodesic automaton build + validation");
    automaton->add_option("--K", K, "signature radius (0 = auto)");
    automaton->add_option("--validate-radius", validate_radius);
    bool emit_dot = false;
    automaton->add_flag("--dot", emit_dot, "also emit graphviz");
    auto* press = app.add_subcommand("pressure", "sphere-sum slope at theta");
    press->add_option("--theta", theta);
    press->add_option("--m-lo", m_lo);
    press->add_option("--m-hi", m_hi);
    auto* levels = app.add_subcommand("levels", "level-set counts of the Green field");
    levels->add_option("--decades", decades);
    levels->add_option("--per-decade", per_decade);
    auto* martin = app.add_subcommand("martin", "Martin kernel ratios along a ray");
    martin->add_option("--x", x_spec, "word, e.g. 'A1' or 'a1 b1'");
    martin->add_option("--ray-length", ray_length);
    auto* ergodic = app.add_subcommand("ergodic-avg", "per-geodesic average stability");
    ergodic->add_option("--ms", ms_spec);
    ergodic->add_option("--samples", samples);
    auto* brw = app.add_subcommand("brw", "branching-walk engines");
    brw->add_option("--mode", mode)->check(CLI::IsMember({"plain", "colored", "snapback"}));
    brw->add_option("--epsilon", epsilon);
    brw->add_option("--kmax", kmax);
    brw->add_option("--replicas", replicas);
    brw->add_option("--delta", delta);

    auto* x_oracle_table = app.add_subcommand("oracle-table", "experiment: oracle CSV");
    x_oracle_table->add_option("--r-grid", grid);
    auto* x_autoval = app.add_subcommand("automaton-validate",
                                         "experiment: path counts vs BFS spheres");
    x_autoval->add_option("--validate-radius", validate_radius);
    auto* x_decay = app.add_subcommand("decay-fit", "experiment: sphere-sum decay at the edge");
    auto* x_sums = app.add_subcommand("sphere-sums", "experiment: sums over an r grid");
    x_sums->add_option("--r-grid", grid);
    auto* x_pzero = app.add_subcommand("pressure-zero", "experiment: vanishing-pressure checks");
    auto* x_crit = app.add_subcommand("critical-exponent", "experiment: exact + property fits");
    auto* x_brwv = app.add_subcommand("brw-verify", "experiment: BRW vs Green identities");
    x_brwv->add_option("--replicas", replicas);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (oracle->parsed()) return cmd_oracle(opt, grid);
        if (green->parsed()) return cmd_green(opt);
        if (spectral->parsed()) return cmd_spectral(opt);
        if (ancona->parsed()) return cmd_ancona(opt, grid, samples);
        if (ineq->parsed()) return cmd_inequalities(opt);
        if (exponent->parsed()) return cmd_exponent(opt, delta_grid);
        if (automaton->parsed()) return cmd_automaton(opt, K, validate_radius, emit_dot);
        if (press->parsed()) return cmd_pressure(opt, theta, m_lo, m_hi);
        if (levels->parsed()) return cmd_levels(opt, decades, per_decade);
        if (martin->parsed()) return cmd_martin(opt, x_spec, ray_length);
        if (ergodic->parsed()) return cmd_ergodic(opt, ms_spec, samples);
        if (brw->parsed()) return cmd_brw(opt, mode, epsilon, kmax, replicas, delta);
        if (x_oracle_table->parsed()) return exp_oracle_table(opt, grid);
        if (x_autoval->parsed()) return exp_automaton_validate(opt, validate_radius);
        if (x_decay->parsed()) return exp_decay_fit(opt);
        if (x_sums->parsed()) return exp_sphere_sums(opt, grid);
        if (x_pzero->parsed()) return exp_pressure_zero(opt);
        if (x_crit->parsed()) return exp_critical_exponent(opt);
        if (x_brwv->parsed()) return exp_brw_verify(opt, replicas);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource overrun: %s (largest feasible %d)\n", e.what(),
                     e.largest_feasible);
        return kExitViolation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitViolation;
    }
    return kExitUsage;
}

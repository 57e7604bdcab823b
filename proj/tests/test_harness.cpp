#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gfront/harness.hpp"

using namespace gfront;

namespace {

std::string write_temp(const std::string& dir, const std::string& name,
                       const std::string& text) {
    std::filesystem::create_directories(dir);
    std::string path = dir + "/" + name;
    std::ofstream out(path);
    out << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parser handles sections, comments and typed reads") {
    ConfigMap cfg = parse_config_text(
        "# top comment\n"
        "[run]\n"
        "seed = 7   # trailing comment\n"
        "label = hello world\n"
        "\n"
        "[estimator]\n"
        "lambdas = 0.2 0.1 0.05\n"
        "cells = 96\n"
        "flag = true\n",
        "inline");
    CHECK(cfg.require("run.label") == "hello world");
    CHECK(cfg.get_long("run.seed", 0) == 7);
    CHECK(cfg.get_long("run.missing", 42) == 42);
    CHECK(cfg.get_bool("estimator.flag", false));
    std::vector<double> l = cfg.get_doubles("estimator.lambdas", {});
    REQUIRE(l.size() == 3);
    CHECK(l[1] == 0.1);
    CHECK(cfg.line_of.at("estimator.cells") == 8);
}

TEST_CASE("config errors name the offending key or line") {
    ConfigMap cfg = parse_config_text("[a]\nx = not_a_number\n", "inline");
    try {
        cfg.require("a.y");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("a.y") != std::string::npos);
    }
    try {
        cfg.require_double("a.x");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("a.x") != std::string::npos);
    }
    // malformed line: no '=' outside a section header
    try {
        parse_config_text("[a]\njust words\n", "inline");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    // duplicate keys are rejected rather than silently overwritten
    CHECK_THROWS_AS(parse_config_text("[a]\nx = 1\nx = 2\n", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config("no_such_file.cfg"), ConfigError);
}

TEST_CASE("field and estimator sections round-trip") {
    ConfigMap cfg = parse_config_text(
        "[field]\nfamily = cellular\ndim = 2\nparams = 1.5\n"
        "[estimator]\nmethod = longtime\nlongtime_T = 12\ncells = 64\n",
        "inline");
    VelocityField f = field_from_config(cfg);
    CHECK(f.name == "cellular");
    CHECK(f.sup_norm == doctest::Approx(1.5));
    EstimatorConfig ec = estimator_from_config(cfg);
    CHECK(ec.method == "longtime");
    CHECK(ec.longtime_T == 12.0);
    CHECK(ec.cells == 64);

    ConfigMap bad = parse_config_text("[field]\nfamily = vortex_soup\ndim = 2\n", "inline");
    CHECK_THROWS_AS(field_from_config(bad), ConfigError);
    ConfigMap badm = parse_config_text(
        "[field]\nfamily = zero\ndim = 2\n[estimator]\nmethod = psychic\n", "inline");
    CHECK_THROWS_AS(estimator_from_config(badm), ConfigError);
}

TEST_CASE("diagnostics experiment writes its artifacts and manifest") {
    std::string dir = "harness_test_diag";
    std::string cfg = write_temp(dir, "diag.cfg",
                                 "[field]\nfamily = cellular\ndim = 2\nparams = 1.5\n"
                                 "[diagnostics]\nresolution = 48\n");
    int rc = run_experiment("diagnostics", cfg, dir + "/out");
    CHECK(rc == 0);
    CHECK(std::filesystem::exists(dir + "/out/diagnostics.json"));
    CHECK(std::filesystem::exists(dir + "/out/manifest.json"));
    std::string manifest = slurp(dir + "/out/manifest.json");
    CHECK(manifest.find("\"experiment\"") != std::string::npos);
    CHECK(manifest.find("diagnostics") != std::string::npos);
    std::string diag = slurp(dir + "/out/diagnostics.json");
    CHECK(diag.find("alpha_star") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes follow the documented contract") {
    std::string dir = "harness_test_codes";
    // unknown experiment -> config error
    std::string ok = write_temp(dir, "ok.cfg", "[field]\nfamily = zero\ndim = 2\n");
    CHECK(run_experiment("seance", ok, dir + "/out1") == 2);
    // missing required key -> config error
    std::string missing = write_temp(dir, "missing.cfg", "[field]\ndim = 2\n");
    CHECK(run_experiment("diagnostics", missing, dir + "/out2") == 2);
    // nonexistent config file -> config error
    CHECK(run_experiment("diagnostics", dir + "/nope.cfg", dir + "/out3") == 2);
    // violated smallness hypothesis -> 4 (initial set covers most of the cell)
    std::string hyp = write_temp(dir, "hyp.cfg",
                                 "[field]\nfamily = zero\ndim = 2\n"
                                 "[area_fraction]\ncells = 48\nseed_radius = 0.49\nT = 1\n");
    CHECK(run_experiment("area_fraction", hyp, dir + "/out4") == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("hbar table experiment emits the table with laminar values") {
    std::string dir = "harness_test_table";
    std::string cfg = write_temp(dir, "table.cfg",
                                 "[field]\nfamily = zero\ndim = 2\n"
                                 "[estimator]\nm = 8\ncells = 32\nlambdas = 0.2 0.1\n"
                                 "scaling_check = false\n");
    REQUIRE(run_experiment("hbar_table", cfg, dir + "/out") == 0);
    std::ifstream in(dir + "/out/table.csv");
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "angle,hbar,err,lower_bound,checks_passed");
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');  // angle
        std::getline(ls, tok, ',');  // hbar
        CHECK(std::stod(tok) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(rows == 8);
    in.close();
    CHECK(std::filesystem::exists(dir + "/out/checks.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("experiments are deterministic across runs") {
    std::string dir = "harness_test_determinism";
    std::string cfg = write_temp(dir, "table.cfg",
                                 "[field]\nfamily = cellular\ndim = 2\nparams = 1\n"
                                 "[estimator]\nm = 8\ncells = 32\nlambdas = 0.2 0.1\n"
                                 "scaling_check = false\n");
    REQUIRE(run_experiment("hbar_table", cfg, dir + "/a") == 0);
    REQUIRE(run_experiment("hbar_table", cfg, dir + "/b") == 0);
    CHECK(slurp(dir + "/a/table.csv") == slurp(dir + "/b/table.csv"));
    CHECK(slurp(dir + "/a/checks.json") == slurp(dir + "/b/checks.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("rate setup preconditions are enforced") {
    EffectiveHamiltonian tab = build_table(make_zero(2), 8, [] {
        EstimatorConfig c;
        c.lambdas = {0.2, 0.1};
        c.cells = 32;
        c.run_scaling_check = false;
        return c;
    }());
    VelocityField f = make_zero(2);

    RateSetup s;
    s.cells = 256;
    s.box = 8.0;
    s.eps_list = {0.25, 0.5};  // not decreasing
    CHECK_THROWS_AS(error_rate(f, tab, s), ConfigError);

    s.eps_list = {0.3};  // not a reciprocal of an integer
    CHECK_THROWS_AS(error_rate(f, tab, s), ConfigError);

    s.eps_list = {1.0 / 64};  // under 8 cells per micro period
    CHECK_THROWS_AS(error_rate(f, tab, s), ConfigError);

    s.eps_list = {0.25};
    s.T = 4.0;  // window (box/2 - (1+||V||) T) <= clamp
    CHECK_THROWS_AS(error_rate(f, tab, s), ConfigError);
}

TEST_CASE("laminar rate run reproduces the exact solution at every eps") {
    // V = 0: u_eps solves the homogenized equation for every eps, so the
    // errors contain pure discretization error and the cross-check gap is
    // small; this pins the plumbing rather than the rate itself
    EstimatorConfig ec;
    ec.lambdas = {0.2, 0.1};
    ec.cells = 32;
    ec.run_scaling_check = false;
    EffectiveHamiltonian tab = build_table(make_zero(2), 16, ec);
    VelocityField f = make_zero(2);
    RateSetup s;
    s.eps_list = {1.0 / 4, 1.0 / 8};
    s.T = 1.0;
    s.box = 8.0;
    s.cells = 512;  // 8 cells per micro period at eps = 1/8
    s.seed_radius = 1.0;
    RateReport rep = error_rate(f, tab, s);
    REQUIRE(rep.errors.size() == 2);
    double dx = s.box / s.cells;
    CHECK(rep.window_half == doctest::Approx(3.0));
    CHECK(rep.cross_check_gap <= s.cross_check_factor * dx);
    for (double e : rep.errors) CHECK(e < 10 * dx);
}

TEST_CASE("version string is exposed") {
    CHECK(std::string(kVersion).find("gfront") != std::string::npos);
}

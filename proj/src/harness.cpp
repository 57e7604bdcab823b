#include "gfront/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gfront/hj_kernel.hpp"
#include "gfront/parallel.hpp"

namespace gfront {

const char* const kVersion = "gfront 0.1.0";

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string ConfigMap::require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end())
        throw ConfigError(path + ": missing required key '" + key + "'");
    return it->second;
}

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (trim(it->second.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(path + ":" + std::to_string(line_of.at(key)) + ": key '" + key +
                      "' is not a number: '" + it->second + "'");
}

double ConfigMap::require_double(const std::string& key) const {
    require(key);
    return get_double(key, 0);
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
    double v = get_double(key, static_cast<double>(fallback));
    long l = std::lround(v);
    if (std::abs(v - l) > 1e-9)
        throw ConfigError(path + ": key '" + key + "' must be an integer");
    return l;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(path + ":" + std::to_string(line_of.at(key)) + ": key '" + key +
                      "' is not a boolean: '" + it->second + "'");
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof())
        throw ConfigError(path + ":" + std::to_string(line_of.at(key)) + ": key '" + key +
                          "' is not a number list: '" + it->second + "'");
    return out;
}

ConfigMap parse_config_text(const std::string& text, const std::string& label) {
    ConfigMap cfg;
    cfg.path = label;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(label + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(label + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(label + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(label + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.kv.count(full))
            throw ConfigError(label + ":" + std::to_string(lineno) + ": duplicate key '" + full +
                              "'");
        cfg.kv[full] = value;
        cfg.line_of[full] = lineno;
    }
    return cfg;
}

ConfigMap parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

VelocityField field_from_config(const ConfigMap& cfg) {
    if (cfg.has("field.file")) return load_sampled_field(cfg.require("field.file"));
    std::string family = cfg.require("field.family");
    int dim = static_cast<int>(cfg.get_long("field.dim", 2));
    std::vector<double> params = cfg.get_doubles("field.params", {});
    return make_builtin(family, dim, params);
}

EstimatorConfig estimator_from_config(const ConfigMap& cfg) {
    EstimatorConfig ec;
    ec.method = cfg.get("estimator.method", ec.method);
    if (ec.method != "penalized" && ec.method != "longtime")
        throw ConfigError(cfg.path + ": key 'estimator.method' must be penalized or longtime");
    ec.lambdas = cfg.get_doubles("estimator.lambdas", ec.lambdas);
    for (double l : ec.lambdas)
        if (l <= 0) throw ConfigError(cfg.path + ": key 'estimator.lambdas' must be positive");
    ec.longtime_T = cfg.get_double("estimator.longtime_T", ec.longtime_T);
    ec.cells = static_cast<int>(cfg.get_long("estimator.cells", ec.cells));
    if (ec.cells < 4) throw ConfigError(cfg.path + ": key 'estimator.cells' too small");
    ec.cfl = cfg.get_double("estimator.cfl", ec.cfl);
    if (ec.cfl <= 0 || ec.cfl > 1)
        throw ConfigError(cfg.path + ": key 'estimator.cfl' must lie in (0, 1]");
    ec.diag_resolution = static_cast<int>(cfg.get_long("estimator.diag_resolution",
                                                       ec.diag_resolution));
    ec.c_I = cfg.get_double("estimator.c_I", ec.c_I);
    ec.check_slack = cfg.get_double("estimator.check_slack", ec.check_slack);
    ec.run_scaling_check = cfg.get_bool("estimator.scaling_check", ec.run_scaling_check);
    return ec;
}

namespace {

nlohmann::json vec_json(const Vec& v) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < v.dim; ++i) j.push_back(v[i]);
    return j;
}

Vec vec_from_doubles(const std::vector<double>& v, const std::string& key) {
    if (v.size() == 2) return Vec(v[0], v[1]);
    if (v.size() == 3) return Vec(v[0], v[1], v[2]);
    throw ConfigError("key '" + key + "' must have 2 or 3 components");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << text;
}

nlohmann::json table_json(const EffectiveHamiltonian& table) {
    nlohmann::json j;
    j["field"] = table.field_name;
    j["sup_norm"] = table.sup_norm;
    j["alpha_star"] = table.diag.alpha_star;
    j["c_I"] = table.diag.c_I;
    j["mean_V"] = vec_json(table.diag.mean_V);
    j["checks"] = {{"homogeneity_ok", table.checks.homogeneity_ok},
                   {"convexity_ok", table.checks.convexity_ok},
                   {"lipschitz_ok", table.checks.lipschitz_ok},
                   {"lower_bound_ok", table.checks.lower_bound_ok},
                   {"worst_convexity_gap", table.checks.worst_convexity_gap},
                   {"worst_lipschitz_excess", table.checks.worst_lipschitz_excess},
                   {"worst_lower_bound_deficit", table.checks.worst_lower_bound_deficit},
                   {"homogeneity_defect", table.checks.homogeneity_defect}};
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.directions.size(); ++i) {
        const HbarEstimate& e = table.estimates[i];
        rows.push_back({{"P", vec_json(table.directions[i])},
                        {"hbar", e.value},
                        {"err", e.error_bar},
                        {"bracket_half", e.bracket_half},
                        {"method", e.method},
                        {"monotone_ok", e.monotone_ok}});
    }
    j["rows"] = rows;
    return j;
}

struct Experiment {
    const ConfigMap& cfg;
    std::string out;
    std::vector<std::string> artifacts;

    std::string art(const std::string& name) {
        artifacts.push_back(name);
        return out + "/" + name;
    }
};

void run_diagnostics(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    int res = static_cast<int>(ex.cfg.get_long("diagnostics.resolution", 64));
    double c_I = ex.cfg.get_double("diagnostics.c_I", default_c_I(field.dim));
    FieldDiagnostics d = diagnostics(field, res, c_I);
    nlohmann::json j;
    j["field"] = field.name;
    j["params"] = field.params;
    j["sup_norm"] = field.sup_norm;
    j["c_I"] = d.c_I;
    j["alpha_star"] = d.alpha_star;
    j["alpha_star_positive"] = d.alpha_star_positive;
    j["mean_V"] = vec_json(d.mean_V);
    j["x_div_mean"] = vec_json(d.x_div_mean);
    j["times"] = d.times;
    j["div_norm"] = d.div_norm;
    j["alpha"] = d.alpha;
    write_text(ex.art("diagnostics.json"), nlohmann::json(j).dump(2) + "\n");
}

EffectiveHamiltonian table_for(Experiment& ex, const VelocityField& field) {
    int m = static_cast<int>(ex.cfg.get_long("estimator.m", 16));
    if (m < 4) throw ConfigError(ex.cfg.path + ": key 'estimator.m' too small");
    return build_table(field, m, estimator_from_config(ex.cfg));
}

void run_hbar_table(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    EffectiveHamiltonian table = table_for(ex, field);
    export_table_csv(table, ex.art("table.csv"));
    write_text(ex.art("checks.json"), table_json(table).dump(2) + "\n");
}

void run_enhancement(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    Vec P = vec_from_doubles(ex.cfg.get_doubles("enhancement.p", {1.0, 0.0}), "enhancement.p");
    double tol = ex.cfg.get_double("enhancement.numeric_tol", 2e-3);
    EnhancementReport rep =
        enhancement_test_steady(field, P, estimator_from_config(ex.cfg), 1e-9, tol);
    nlohmann::json j;
    j["field"] = field.name;
    j["P"] = vec_json(rep.P);
    j["enhanced_analytic"] = rep.enhanced_analytic;
    j["enhanced_numeric"] = rep.enhanced_numeric;
    j["match"] = rep.match;
    j["max_inner"] = rep.max_inner;
    j["witness"] = vec_json(rep.witness);
    j["hbar"] = rep.hbar;
    j["margin"] = rep.margin;
    write_text(ex.art("enhancement.json"), nlohmann::json(j).dump(2) + "\n");
}

void run_certificate(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    Vec P = vec_from_doubles(ex.cfg.get_doubles("certificate.p", {1.0, 0.0}), "certificate.p");
    std::string kind = ex.cfg.get("certificate.zhat", "sawtooth");
    int ns = static_cast<int>(ex.cfg.get_long("certificate.samples", 4096));
    if (ns < 4) throw ConfigError(ex.cfg.path + ": key 'certificate.samples' too small");
    std::vector<double> zhat;
    if (kind == "sawtooth") {
        // zhat(s) = [s] - s, sampled at s_i = i/ns
        for (int i = 0; i < ns; ++i) zhat.push_back(-static_cast<double>(i) / ns);
    } else if (kind == "zero") {
        zhat.assign(ns, 0.0);
    } else {
        std::ifstream in(kind);
        if (!in)
            throw ConfigError(ex.cfg.path +
                              ": key 'certificate.zhat' must be sawtooth, zero, or a readable "
                              "file of samples: " +
                              kind);
        double v;
        while (in >> v) zhat.push_back(v);
    }
    CertificateConfig cc;
    cc.test_degree = static_cast<int>(ex.cfg.get_long("certificate.degree", cc.test_degree));
    cc.quad_cells = static_cast<int>(ex.cfg.get_long("certificate.quad_cells", cc.quad_cells));
    cc.time_samples =
        static_cast<int>(ex.cfg.get_long("certificate.time_samples", cc.time_samples));
    cc.flow_seeds = static_cast<int>(ex.cfg.get_long("certificate.flow_seeds", cc.flow_seeds));
    cc.flow_horizon = ex.cfg.get_double("certificate.flow_horizon", cc.flow_horizon);
    EnhancementCertificate cert = verify_certificate(field, P, zhat, cc);
    export_certificate_json(cert, ex.art("certificate.json"));
}

void run_wulff(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    EffectiveHamiltonian table = table_for(ex, field);
    WulffShape W = wulff_from_table(table);
    export_table_csv(table, ex.art("table.csv"));
    export_wulff_csv(W, ex.art("wulff_vertices.csv"), ex.art("wulff_support.csv"));
    write_text(ex.art("wulff.json"), table_json(table).dump(2) + "\n");
}

void run_front(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    EffectiveHamiltonian table = table_for(ex, field);
    WulffShape W = wulff_from_table(table);

    double box = ex.cfg.get_double("front.box", 8.0);
    int cells = static_cast<int>(ex.cfg.get_long("front.cells", 128));
    std::string shape = ex.cfg.get("front.seed_shape", "square");
    double size = ex.cfg.get_double("front.seed_size", 2.0);
    std::vector<double> times = ex.cfg.get_doubles("front.times", {});
    if (times.empty()) throw ConfigError(ex.cfg.path + ": missing required key 'front.times'");

    GridSpec g = GridSpec::macro_box(field.dim, box, cells);
    CellMask K0;
    if (shape == "square") {
        K0 = mask_from_indicator(g, [&](const Vec& x) { return x.norm_inf() <= size / 2; });
    } else if (shape == "ball") {
        K0 = mask_from_indicator(g, [&](const Vec& x) { return x.norm() <= size / 2; });
    } else {
        throw ConfigError(ex.cfg.path + ": key 'front.seed_shape' must be square or ball");
    }
    FrontOptions opt;
    opt.clamp = ex.cfg.get_double("front.clamp", opt.clamp);
    opt.grow_window = ex.cfg.get_bool("front.grow_window", opt.grow_window);
    std::vector<FrontState> states = propagate_front(field, K0, times, opt);
    double cap = ex.cfg.get_double("front.slope_cap", 0.05);
    InclusionReport rep = inclusion_deviation(states, W, cap);

    export_front_masks(states, ex.out + "/masks");
    ex.artifacts.push_back("masks/index.json");
    export_inclusion_csv(rep, ex.art("inclusion.csv"));
    nlohmann::json j;
    j["field"] = field.name;
    j["seed_shape"] = shape;
    j["seed_size"] = size;
    j["c_out_slope"] = rep.c_out_slope;
    j["c_in_slope"] = rep.c_in_slope;
    j["slope_cap"] = cap;
    j["bounded"] = rep.bounded;
    write_text(ex.art("front.json"), nlohmann::json(j).dump(2) + "\n");
}

void run_error_rate(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    EffectiveHamiltonian table = table_for(ex, field);
    RateSetup setup;
    setup.eps_list = ex.cfg.get_doubles("error_rate.eps", {1.0 / 8, 1.0 / 16, 1.0 / 32});
    setup.T = ex.cfg.get_double("error_rate.T", setup.T);
    setup.box = ex.cfg.get_double("error_rate.box", setup.box);
    setup.cells = static_cast<int>(ex.cfg.get_long("error_rate.cells", setup.cells));
    setup.seed_radius = ex.cfg.get_double("error_rate.seed_radius", setup.seed_radius);
    if (ex.cfg.has("error_rate.seed_center"))
        setup.seed_center =
            vec_from_doubles(ex.cfg.get_doubles("error_rate.seed_center", {}),
                             "error_rate.seed_center");
    setup.clamp = ex.cfg.get_double("error_rate.clamp", setup.clamp);
    RateReport rep = error_rate(field, table, setup);

    std::ostringstream csv;
    csv << std::setprecision(12) << "eps,error\n";
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        csv << rep.eps[i] << ',' << rep.errors[i] << '\n';
    write_text(ex.art("rate.csv"), csv.str());
    nlohmann::json j;
    j["field"] = field.name;
    j["eps"] = rep.eps;
    j["errors"] = rep.errors;
    j["q"] = rep.q;
    j["c_hat"] = rep.c_hat;
    j["cross_check_gap"] = rep.cross_check_gap;
    j["window_half"] = rep.window_half;
    j["fit_points"] = rep.fit_points;
    write_text(ex.art("rate.json"), nlohmann::json(j).dump(2) + "\n");
}

SlowField slow_field_from_config(const ConfigMap& cfg, const std::vector<Vec>& points) {
    std::string family = cfg.require("slow.family");
    std::vector<double> p = cfg.get_doubles("slow.params", {});
    SlowField s;
    s.dim = 2;
    s.name = family;
    if (family == "cellular_graded") {
        // cellular flow with macroscopically graded amplitude a0 + a1 x_1
        if (p.size() != 2) throw ConfigError("slow.params: cellular_graded needs a0 a1");
        double a0 = p[0], a1 = p[1];
        s.eval = [a0, a1](const Vec& x, const Vec& y, double) {
            double A = a0 + a1 * x[0];
            double c1 = std::cos(2 * kPi * y[0]), s1 = std::sin(2 * kPi * y[0]);
            double c2 = std::cos(2 * kPi * y[1]), s2 = std::sin(2 * kPi * y[1]);
            return Vec(-A * s1 * c2, A * c1 * s2);
        };
        double amax = 0;
        for (const Vec& x : points) amax = std::max(amax, std::abs(a0 + a1 * x[0]));
        s.sup_norm = amax;
        s.lipschitz_bound = 2 * kPi * amax;
    } else if (family == "shear_graded") {
        // shear along e1 with amplitude a0 + a1 x_2
        if (p.size() != 2) throw ConfigError("slow.params: shear_graded needs a0 a1");
        double a0 = p[0], a1 = p[1];
        s.eval = [a0, a1](const Vec& x, const Vec& y, double) {
            double A = a0 + a1 * x[1];
            return Vec(A * std::sin(2 * kPi * y[1]), 0.0);
        };
        double amax = 0;
        for (const Vec& x : points) amax = std::max(amax, std::abs(a0 + a1 * x[1]));
        s.sup_norm = amax;
        s.lipschitz_bound = 2 * kPi * amax;
    } else {
        throw ConfigError("slow.family must be cellular_graded or shear_graded, got " + family);
    }
    return s;
}

void run_slow_table(Experiment& ex) {
    std::vector<double> raw = ex.cfg.get_doubles("slow.points", {});
    if (raw.empty() || raw.size() % 2 != 0)
        throw ConfigError(ex.cfg.path +
                          ": key 'slow.points' must list macro points as x0 y0 x1 y1 ...");
    std::vector<Vec> points;
    for (std::size_t i = 0; i + 1 < raw.size(); i += 2) points.push_back(Vec(raw[i], raw[i + 1]));
    SlowField slow = slow_field_from_config(ex.cfg, points);
    int m = static_cast<int>(ex.cfg.get_long("estimator.m", 8));
    SlowHbarTable tab = slow_table(slow, points, m, estimator_from_config(ex.cfg));

    std::ostringstream csv;
    csv << std::setprecision(12) << "x0,x1";
    for (std::size_t i = 0; i < tab.directions.size(); ++i) csv << ",hbar_" << i;
    csv << "\n";
    for (std::size_t p = 0; p < points.size(); ++p) {
        csv << points[p][0] << ',' << points[p][1];
        for (double v : tab.values[p]) csv << ',' << v;
        csv << '\n';
    }
    write_text(ex.art("slow_table.csv"), csv.str());

    nlohmann::json j;
    j["family"] = slow.name;
    j["sup_norm"] = slow.sup_norm;
    j["bound_int_ok"] = tab.bound_int_ok;
    j["growth_bound_ok"] = tab.growth_bound_ok;
    nlohmann::json cont = nlohmann::json::array();
    for (auto& [d, g] : tab.continuity_modulus) cont.push_back({{"dist", d}, {"gap", g}});
    j["continuity_modulus"] = cont;
    nlohmann::json dirs = nlohmann::json::array();
    for (const Vec& d : tab.directions) dirs.push_back(vec_json(d));
    j["directions"] = dirs;
    write_text(ex.art("slow.json"), nlohmann::json(j).dump(2) + "\n");
}

void run_area_fraction(Experiment& ex) {
    VelocityField field = field_from_config(ex.cfg);
    int cells = static_cast<int>(ex.cfg.get_long("area_fraction.cells", 96));
    double theta = ex.cfg.get_double("area_fraction.theta", 0.0);
    double T = ex.cfg.get_double("area_fraction.T", 6.0);
    double r = ex.cfg.get_double("area_fraction.seed_radius", 0.25);
    double c_I = ex.cfg.get_double("area_fraction.c_I", -1);
    double slack = ex.cfg.get_double("area_fraction.slack", -1);
    int spu = static_cast<int>(ex.cfg.get_long("area_fraction.samples_per_unit", 16));

    GridSpec g = GridSpec::unit_cell(field, cells);
    GridField z0(g);
    z0.assign([&](const Vec& x) { return x.norm() - r; });
    AreaFractionTrace tr = area_fraction_trace(field, z0, theta, T, c_I, slack, spu);

    std::ostringstream csv;
    csv << std::setprecision(12) << "t,rho,alpha\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        csv << tr.times[i] << ',' << tr.rho[i] << ',' << tr.alpha[i] << '\n';
    write_text(ex.art("area.csv"), csv.str());
    nlohmann::json j;
    j["field"] = field.name;
    j["theta"] = tr.theta;
    j["alpha_star"] = tr.alpha_star;
    j["t_star"] = tr.t_star;
    j["zero_time"] = tr.zero_time;
    j["monotone"] = tr.monotone;
    j["pairwise_ok"] = tr.pairwise_ok;
    j["worst_pair_defect"] = tr.worst_pair_defect;
    j["extinct_by_tstar"] = tr.extinct_by_tstar;
    write_text(ex.art("area.json"), nlohmann::json(j).dump(2) + "\n");
}

}  // namespace

RateReport error_rate(const VelocityField& base, const EffectiveHamiltonian& table,
                      const RateSetup& setup) {
    if (setup.eps_list.empty()) throw ConfigError("error_rate: empty eps list");
    for (std::size_t i = 0; i < setup.eps_list.size(); ++i) {
        double eps = setup.eps_list[i];
        if (eps <= 0 || eps > 1) throw ConfigError("error_rate: eps must lie in (0, 1]");
        if (i > 0 && eps >= setup.eps_list[i - 1])
            throw ConfigError("error_rate: eps list must be strictly decreasing");
        double inv = 1.0 / eps;
        if (std::abs(inv - std::round(inv)) > 1e-9 * inv)
            throw ConfigError("error_rate: eps must be the reciprocal of an integer");
        double cells_per_period = setup.cells * eps / setup.box;
        if (cells_per_period < 8 - 1e-9)
            throw ConfigError("error_rate: fewer than 8 cells per micro period at eps = " +
                              std::to_string(eps));
    }
    double speed = 1.0 + base.sup_norm;
    RateReport rep;
    rep.window_half = setup.box / 2 - speed * setup.T;
    if (rep.window_half <= setup.clamp)
        throw ConfigError("error_rate: box too small for the interior window, need > " +
                          std::to_string(2 * (speed * setup.T + setup.clamp)));

    GridSpec g = GridSpec::macro_box(base.dim, setup.box, setup.cells);
    g.set_dissipation(base);
    GridField u0(g);
    u0.assign([&](const Vec& x) {
        return std::clamp(setup.seed_radius - (x - setup.seed_center).norm(), -setup.clamp,
                          setup.clamp);
    });

    // reference: Hopf-Lax under the Wulff shape, cross-checked against a
    // refined homogenized grid evolution before any rate is fitted (the
    // first-order scheme smears kinks at O(sqrt(dx)), so the evolution runs
    // on a refined grid). The cross-check validates the reference
    // construction itself, so its resolution is capped independently of the
    // experiment grid.
    WulffShape W = wulff_from_table(table);
    GridField ubar = hopf_lax_ball(g, setup.seed_center, setup.seed_radius, setup.clamp, setup.T,
                                   W);
    // The cross-check uses a smooth radial profile instead of the clamped
    // cone: the Hopf-Lax value of any radially decreasing g is exactly
    // g(dist(x - c0, tW)), while the grid scheme converges at first order on
    // smooth data (the cone apex and clamp edges are kinks whose O(sqrt(dx))
    // smear would contaminate the whole causal cone).
    const int cross_cells = std::min(2 * setup.cells, 2048);
    GridSpec gf = GridSpec::macro_box(base.dim, setup.box, cross_cells);
    gf.set_dissipation(base);
    // gentle width: the grid evolution's a-priori error is
    // ~ (1+||V||) dx ||D^2 u|| T / 2, so the profile curvature must stay O(1)
    const double width = 0.7;
    auto profile = [&](double s) {
        return setup.clamp * std::tanh((setup.seed_radius - s) / width);
    };
    GridField uf0(gf);
    uf0.assign([&](const Vec& x) { return profile((x - setup.seed_center).norm()); });
    // angle lookup table for the support function (the per-cell per-step
    // Hamiltonian evaluation dominates the fine-grid evolution otherwise)
    const int nlut = 8192;
    std::vector<double> lut(nlut);
    for (int i = 0; i < nlut; ++i) {
        // H(q) = support_W(-q) under the u0(x - t y) Hopf-Lax convention
        double th = 2 * kPi * i / nlut;
        lut[i] = W.support(Vec(-std::cos(th), -std::sin(th)));
    }
    auto h_lut = [&lut, nlut](const Vec& q) {
        double r = q.norm();
        if (r == 0) return 0.0;
        double a = std::atan2(q[1], q[0]) / (2 * kPi);
        double pos = (a - std::floor(a)) * nlut;
        int i = std::min(nlut - 1, static_cast<int>(pos));
        double fr = pos - i;
        return r * ((1 - fr) * lut[i] + fr * lut[(i + 1) % nlut]);
    };
    GridField ubar_grid = evolve_custom(std::move(uf0), h_lut, gf.dissipation, setup.T);
    auto in_window = [&](const Vec& x) { return x.norm_inf() <= rep.window_half; };
    double gap = 0;
    for (std::size_t lin = 0; lin < gf.cells(); ++lin) {
        Vec x = gf.cell_center(lin);
        if (!in_window(x)) continue;
        double ref = profile(W.distance(x - setup.seed_center, setup.T));
        gap = std::max(gap, std::abs(ref - ubar_grid.values[lin]));
    }
    rep.cross_check_gap = gap;
    // agreement bound: factor * dissipation-scaled cells of whichever
    // reference grid is coarser (the scheme's error constant carries 1+||V||)
    if (gap > setup.cross_check_factor * (1.0 + base.sup_norm) *
                  std::max(g.max_dx(), gf.max_dx()))
        throw NumericError("error_rate: reference solutions disagree by " + std::to_string(gap) +
                           " (> " + std::to_string(setup.cross_check_factor) + " dx)");

    for (double eps : setup.eps_list) {
        VelocityField feps = rescaled_field(base, eps);
        GridField u = evolve(u0, feps, Vec::zero(base.dim), setup.T, 0.0);
        double err = 0;
        for (std::size_t lin = 0; lin < g.cells(); ++lin)
            if (in_window(g.cell_center(lin)) &&
                std::abs(ubar.values[lin]) <= 0.8 * setup.clamp)
                err = std::max(err, std::abs(u.values[lin] - ubar.values[lin]));
        if (!(err > 0)) throw NumericError("error_rate: zero/invalid sup error");
        rep.eps.push_back(eps);
        rep.errors.push_back(err);
    }
    // fit the trailing 3 points (all points when only 3 are given)
    rep.fit_points = static_cast<int>(std::min<std::size_t>(rep.eps.size(), 3));
    std::size_t first = rep.eps.size() - rep.fit_points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = rep.fit_points;
    for (std::size_t i = first; i < rep.eps.size(); ++i) {
        double x = std::log(rep.eps[i]), y = std::log(rep.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.c_hat = std::exp((sy - rep.q * sx) / n);
    if (!std::isfinite(rep.q)) throw NumericError("error_rate: non-finite fitted order");
    return rep;
}

int run_experiment(const std::string& experiment, const std::string& config_path,
                   const std::string& out_dir) {
    using Runner = void (*)(Experiment&);
    static const std::map<std::string, Runner> runners = {
        {"diagnostics", run_diagnostics}, {"hbar_table", run_hbar_table},
        {"enhancement", run_enhancement}, {"certificate", run_certificate},
        {"wulff", run_wulff},             {"front", run_front},
        {"error_rate", run_error_rate},   {"slow_table", run_slow_table},
        {"area_fraction", run_area_fraction}};
    try {
        auto it = runners.find(experiment);
        if (it == runners.end()) {
            std::string names;
            for (auto& [k, v] : runners) names += (names.empty() ? "" : ", ") + k;
            throw ConfigError("unknown experiment '" + experiment + "' (expected one of " +
                              names + ")");
        }
        auto t0 = std::chrono::steady_clock::now();
        ConfigMap cfg = parse_config(config_path);
        std::filesystem::create_directories(out_dir);
        Experiment ex{cfg, out_dir, {}};
        it->second(ex);

        nlohmann::json manifest;
        manifest["experiment"] = experiment;
        manifest["version"] = kVersion;
        manifest["config_file"] = config_path;
        manifest["config"] = nlohmann::json::object();
        for (auto& [k, v] : cfg.kv) manifest["config"][k] = v;
        manifest["seed"] = cfg.get_long("run.seed", 0);
        manifest["threads"] = thread_count();
        manifest["artifacts"] = ex.artifacts;
        manifest["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace gfront

#pragma once

#include <map>
#include <string>
#include <vector>

#include "gfront/effective.hpp"
#include "gfront/fields.hpp"
#include "gfront/front_geometry.hpp"

namespace gfront {

/// Flat key = value config with [section] headers; '#' starts a comment.
/// Keys are addressed as "section.key". Lookup failures name the key and the
/// file; parse failures name the line.
struct ConfigMap {
    std::string path;
    std::map<std::string, std::string> kv;
    std::map<std::string, int> line_of;

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    std::string require(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
};

ConfigMap parse_config(const std::string& path);
ConfigMap parse_config_text(const std::string& text, const std::string& label);

/// [field] section: family + dim + params (space-separated), or file= for a
/// sampled field.
VelocityField field_from_config(const ConfigMap& cfg);
/// [estimator] section (all keys optional).
EstimatorConfig estimator_from_config(const ConfigMap& cfg);

/// eps -> sup-error fit of the two-scale approximation. The reference ubar is
/// the Hopf-Lax evolution of the same clamped-ball data under the field's
/// Wulff shape, cross-checked against a homogenized grid evolution before any
/// rate is fitted.
struct RateReport {
    std::vector<double> eps;
    std::vector<double> errors;  // sup |u_eps - ubar| on the interior window
    double q = 0;                // fitted order (log-log least squares)
    double c_hat = 0;            // fitted constant
    double cross_check_gap = 0;  // Hopf-Lax vs grid-evolution disagreement
    double window_half = 0;
    int fit_points = 0;          // trailing points used in the fit
};

struct RateSetup {
    std::vector<double> eps_list;  // decreasing reciprocals of integers
    double T = 1.0;
    double box = 8.0;  // macro box side
    int cells = 512;   // per axis
    Vec seed_center = Vec(0.0, 0.0);
    double seed_radius = 1.0;
    double clamp = 1.0;
    double cross_check_factor = 3.0;  // agreement bound in units of dx
};

RateReport error_rate(const VelocityField& base, const EffectiveHamiltonian& table,
                      const RateSetup& setup);

/// Dispatch an experiment by name, reading `config_path` and writing all
/// artifacts plus manifest.json under `out_dir`. Returns the process exit
/// code: 0 ok, 2 config error, 3 numeric failure, 4 hypothesis violation.
/// Diagnostics go to stderr.
int run_experiment(const std::string& experiment, const std::string& config_path,
                   const std::string& out_dir);

extern const char* const kVersion;

}  // namespace gfront

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gfront/common.hpp"

namespace gfront {

/// A Z^{N+1}-periodic velocity field V(x,t). Built-in families are analytic
/// and carry exact sup-norms; user fields may come from samplers or files.
/// Evaluation is pure and safe for concurrent read-only use.
struct VelocityField {
    int dim = 2;
    std::string name = "zero";
    std::string params;  // human-readable parameter record

    double sup_norm = 0.0;         // ||V||_inf over the period cell
    double lipschitz_bound = 0.0;  // declared bound, 0 when unknown
    bool divergence_free = false;  // analytic property (built-ins)
    bool time_dependent = false;

    std::function<Vec(const Vec&, double)> eval;
    std::function<double(const Vec&, double)> div_eval;  // analytic divergence, may be empty

    Vec operator()(const Vec& x, double t) const { return eval(x, t); }

    /// Analytic divergence when available, otherwise central differences
    /// with step h and periodic wraparound.
    double divergence(const Vec& x, double t, double h) const;
};

VelocityField make_zero(int dim);
VelocityField make_constant(const Vec& c);

/// Shear drift along `axis`: V = amplitude * profile(x_perp) * e_axis, where
/// x_perp is the next coordinate (mod dim). profile must be 1-periodic;
/// default sin(2*pi*s). N=2 and N=3 supported.
VelocityField make_shear(int axis, double amplitude,
                         std::function<double(double)> profile = {},
                         std::function<double(double)> profile_deriv = {}, int dim = 2);

/// Steady cellular flow, N=2 only: stream function E = (A/2pi) sin(2pi x1) sin(2pi x2),
/// V = grad^perp E. Divergence-free, mean-zero, ||V||_inf = A.
VelocityField make_cellular(double amplitude);

/// Traveling stream-product flow, N=2 only: E(x,t) = E1(x1+t) E2(x2) with
/// E1(s) = a1 sin(2pi s), E2(y) = a2 sin(2pi y), V = grad^perp E.
/// E1(0) = 0, so the lines x1 + t in Z are invariant. ||V||_inf = 2pi a1 a2.
VelocityField make_traveling_product(double a1, double a2);

/// Named-family dispatcher used by the config file loader.
/// family in {zero, constant, shear, cellular, traveling_product}.
VelocityField make_builtin(const std::string& family, int dim, const std::vector<double>& params);

/// V(x,t) - c(t) for a 1-periodic shift c; used by the Galilean-shift check.
VelocityField shifted_field(const VelocityField& base, std::function<Vec(double)> c,
                            double c_sup_norm);

/// V(x/eps, t/eps): the oscillatory field at scale eps seen on the macro grid.
VelocityField rescaled_field(const VelocityField& base, double eps);

/// Grid-sampled field with multilinear interpolation (periodic in x and t).
/// File format (whitespace-separated text):
///   dim n nt
///   then nt * n^dim * dim values, slices outermost, cells row-major
///   (x-fastest), components innermost. Samples live at cell corners
///   x_i = i/n in [0,1)^dim, t_k = k/nt.
VelocityField load_sampled_field(const std::string& path);
VelocityField make_sampled_field(int dim, int n, int nt, std::vector<double> values);

/// Field diagnostics entering the small-divergence hypothesis:
/// alpha(t) = 1/c_I - ||div_x V(.,t)||_{L^N(Q_1)}, alpha* = int_0^1 alpha,
/// <V> and <x div V> over the space-time period cell.
struct FieldDiagnostics {
    std::vector<double> times;
    std::vector<double> div_norm;
    std::vector<double> alpha;
    double alpha_star = 0.0;
    Vec mean_V;
    Vec x_div_mean;
    double c_I = 0.0;
    bool alpha_star_positive = false;
};

/// L^N norm of div_x V(.,t) over Q_1 = (-1/2,1/2)^N, tensor midpoint rule.
double divergence_norm(const VelocityField& field, double t, int resolution);

FieldDiagnostics diagnostics(const VelocityField& field, int resolution, double c_I);

/// Default isoperimetric constant of the unit square/cube used in (divG);
/// 1/sqrt(2) for N=2 (attained by the straight half-cut).
double default_c_I(int dim);

/// Max of (|E| ^ (N-1)/N) / Per(E,Q1) over the straight-cut and
/// corner-quarter-disk candidate families (N=2); validates that the
/// configured c_I is not exceeded by these candidates.
double isoperimetric_candidate_max(int sweep);

}  // namespace gfront

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gfront/effective.hpp"
#include "gfront/fields.hpp"
#include "gfront/grid.hpp"

namespace gfront {

/// Convex body W = {y : <P,y> + h(P) >= 0 for all fan P} as a half-space
/// intersection, with explicit vertex polygon for dim 2.
struct WulffShape {
    std::vector<Vec> normals;     // unit fan directions P_i
    std::vector<double> offsets;  // h(P_i) > 0
    std::vector<Vec> vertices;    // counterclockwise polygon (dim 2)

    double support(const Vec& d) const;  // max_{y in vertices} <d,y>
    bool contains(const Vec& y, double slack = 0.0) const;  // all half-space tests
    /// Distance from y to the scaled body s*W (0 when inside).
    double distance(const Vec& y, double scale) const;
};

WulffShape wulff_from_table(const EffectiveHamiltonian& table);

/// Hopf-Lax evaluation u(x,t) = sup_{y in W} u0(x - t y) on a grid.
/// The sup is sampled over radial shells of the vertex polygon (vertices,
/// edge subdivisions, scaled copies down to the origin) -- exact for affine
/// u0 and within O(shell spacing * Lip u0) in general.
GridField hopf_lax(const GridSpec& grid, const std::function<double(const Vec&)>& u0, double t,
                   const WulffShape& W, int edge_samples = 8, int shells = 8);

/// Exact Hopf-Lax for clamped-ball data u0 = clamp(r - |x - c0|):
/// u(x,t) = clamp(r - dist(x - c0, t W)).
GridField hopf_lax_ball(const GridSpec& grid, const Vec& c0, double r, double clamp_at, double t,
                        const WulffShape& W);

/// Super-level-set mask on a grid.
struct CellMask {
    GridSpec grid;
    std::vector<std::uint8_t> cells;

    CellMask() = default;
    explicit CellMask(const GridSpec& g) : grid(g), cells(g.cells(), 0) {}
    double area() const;  // covered area (cell count * cell volume)
};

CellMask mask_from_indicator(const GridSpec& grid, const std::function<bool(const Vec&)>& inside);
CellMask mask_of(const GridField& u);  // {u >= 0}

/// Level-set state of a propagating front at scale eps = 1.
struct FrontState {
    GridField u;
    CellMask K;  // {u >= 0}
    double t = 0;
};

struct FrontOptions {
    double clamp = 1.0;      // clamped signed distance bound
    bool grow_window = true; // double the box when the margin drops below 10%
    double margin_fraction = 0.1;
};

/// Evolve u_t = |Du| + <V,Du> from the clamped signed distance of K0 and
/// snapshot at the requested (increasing) times.
std::vector<FrontState> propagate_front(const VelocityField& field, const CellMask& K0,
                                        const std::vector<double>& times,
                                        const FrontOptions& opt = {});

/// Deviations from the asymptotic shape: per state,
///   C_out(t) = min{C : K(t) subset of (t+C) W}   (support-function ratio)
///   C_in(t)  = min{C >= 0 : (t - C t^{2/3}) W subset of K(t)}  (bisection on
///              rasterized containment with one-cell slack).
struct InclusionReport {
    std::vector<double> times, c_out, c_in;
    double c_out_slope = 0, c_in_slope = 0;  // least-squares trends per unit time
    bool bounded = true;                     // |slopes| below the given cap
};
InclusionReport inclusion_deviation(const std::vector<FrontState>& states, const WulffShape& W,
                                    double slope_cap = 0.05);

/// rho(t) = |{z(.,t) < theta}| on the unit periodic cell for
/// z_t = |Dz| + <V,Dz>, with the shrink-rate inequality
///   rho(t2) - rho(t1) <= -int alpha(s) rho(s)^{(N-1)/N} ds
/// checked pairwise, and extinction by t* = 1 + N/(2^{1/N} alpha*).
struct AreaFractionTrace {
    double theta = 0;
    std::vector<double> times, rho, alpha;
    double alpha_star = 0;
    double t_star = 0;           // extinction bound from alpha*
    double worst_pair_defect = 0;  // max positive violation of the inequality
    double zero_time = -1;       // first sampled time with rho = 0 (-1 if never)
    bool monotone = true;
    bool pairwise_ok = true;
    bool extinct_by_tstar = false;  // rho hits 0 by t* + slack
};
AreaFractionTrace area_fraction_trace(const VelocityField& field, const GridField& z0,
                                      double theta, double T, double c_I = -1,
                                      double slack = -1, int samples_per_unit = 16);

/// Exports: Wulff vertices/support CSV, front masks as PBM bitmaps with a
/// JSON index, deviation report CSV.
void export_wulff_csv(const WulffShape& W, const std::string& vertex_path,
                      const std::string& support_path);
void export_front_masks(const std::vector<FrontState>& states, const std::string& dir);
void export_inclusion_csv(const InclusionReport& rep, const std::string& path);

}  // namespace gfront

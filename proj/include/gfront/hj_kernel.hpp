#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gfront/fields.hpp"
#include "gfront/grid.hpp"

namespace gfront {

/// Global Lax-Friedrichs numerical flux for H(x,t,p) = |p| + <V,p> with the
/// affine background direction P threaded through (the affine part <P,x> is
/// never stored on the grid):
///   H((p- + p+)/2 + P) + 1/2 sum_i dissipation[i] (p+_i - p-_i).
/// The dissipation enters with a plus sign because the Hamiltonian sits on
/// the right-hand side of u_t + lambda u = H (the update adds H_num, so the
/// upwinding term must act as a diffusion, not an anti-diffusion).
/// Consistent: equals |p+P| + <V, p+P> when p- = p+ = p.
double numerical_hamiltonian(const Vec& p_minus, const Vec& p_plus, const Vec& V, const Vec& P,
                             const std::array<double, kMaxDim>& dissipation, int dim);

/// One explicit monotone update of u_t + lambda u = H_num, with the damping
/// integrated exactly on constants:
///   u <- e^{-lambda dt} u + phi(dt) H_num,  phi = (1 - e^{-lambda dt})/lambda
/// (phi = dt when lambda = 0). Rejects dt above the CFL limit.
void step(GridField& u, const VelocityField& field, const Vec& P, double dt, double lambda);

/// Repeated stepping engine for one (grid, field, P, lambda, dt) combination.
/// Velocity values at cell centers are cached per time-step slice; for a
/// field with unit time period and dt = 1/steps_per_period the slices repeat
/// every period, so long runs evaluate the field only once per slice.
class Stepper {
  public:
    Stepper(const GridSpec& grid, const VelocityField& field, const Vec& P, double lambda,
            double dt);

    void advance(GridField& u, long nsteps) const;
    /// Single step with an explicit dt override (used for a final partial
    /// step; bypasses the cache).
    void advance_partial(GridField& u, double dt) const;

    double dt() const { return dt_; }

  private:
    const float* slice(double t) const;

    GridSpec grid_;
    VelocityField field_;
    Vec P_;
    double lambda_;
    double dt_;
    int steps_per_period_;  // 1 for steady fields
    bool cache_enabled_;
    mutable std::vector<std::vector<float>> cache_;

    void apply(GridField& u, const float* vel, double dt) const;
    void eval_slice(double t, std::vector<float>& out) const;
    friend void step(GridField&, const VelocityField&, const Vec&, double, double);
};

/// Time integration from u0 to time T (from u0.time_stamp). dt is the CFL
/// limit, snapped so the run lands on T exactly and, for time-periodic
/// fields, so that steps tile the unit period.
GridField evolve(GridField u0, const VelocityField& field, const Vec& P, double T, double lambda);

/// Same scheme for a space-time-homogeneous Hamiltonian H(q) (used for the
/// homogenized surrogate evolution u_t = Hbar(Du)).
GridField evolve_custom(GridField u0, const std::function<double(const Vec&)>& hamiltonian,
                        const std::array<double, kMaxDim>& dissipation, double T);

}  // namespace gfront

#include "gfront/cell_problem.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gfront/hj_kernel.hpp"

namespace gfront {

double cosc_constant(double sup_norm, double alpha_star, int dim) {
    return 4.0 * (1.0 + sup_norm) * (std::pow(2.0, 1.0 / dim) * dim / alpha_star + 3.0);
}

double cosc_constant_alt(double sup_norm, double alpha_star, int dim) {
    return 4.0 * (1.0 + sup_norm) * (std::pow(2.0, 1.0 / dim) / alpha_star + 3.0 * dim);
}

namespace {

/// dt that tiles the unit time period and respects the CFL limit.
double period_dt(const GridSpec& grid) {
    return 1.0 / std::ceil(1.0 / grid.cfl_dt());
}

}  // namespace

CellSolution solve_penalized(const VelocityField& field, const Vec& P, double lambda,
                             const GridSpec& grid, const PenalizedOptions& opt) {
    if (lambda <= 0) throw ConfigError("solve_penalized: lambda must be positive");
    if (grid.dim != field.dim) throw ConfigError("solve_penalized: grid/field dim mismatch");

    CellSolution sol;
    sol.P = P;
    sol.lambda = lambda;
    const double pnorm = P.norm();
    const bool checked = std::isfinite(opt.alpha_star) && opt.alpha_star > 0;
    if (checked) sol.C_osc = cosc_constant(field.sup_norm, opt.alpha_star, field.dim);
    sol.osc_bound_checked = checked;

    if (pnorm == 0) {
        sol.slices.assign(1, GridField(grid));
        return sol;
    }

    const double tol = opt.tol > 0 ? opt.tol : 1e-8 * (1.0 + pnorm) / lambda;
    const long max_periods =
        opt.max_periods > 0 ? opt.max_periods
                            : std::max<long>(40, static_cast<long>(std::ceil(20.0 / lambda)));
    const double dt = period_dt(grid);
    const long spp = std::lround(1.0 / dt);
    Stepper stepper(grid, field, P, lambda, dt);

    GridField u(grid);
    if (opt.warm_start) {
        if (opt.warm_start->values.size() != u.values.size())
            throw ConfigError("solve_penalized: warm start grid mismatch");
        u.values = opt.warm_start->values;
    }
    u.time_stamp = 0;

    GridField prev = u, cand, cand_next;
    double c1 = 0, c2 = 0, c3 = 0;  // last three period-to-period changes
    long since_extrapolation = 0;
    int rejected_jumps = 0;
    bool accelerate = opt.accelerate;
    bool converged = false;
    while (sol.periods < max_periods && !converged) {
        prev.values = u.values;
        stepper.advance(u, spp);
        u.time_stamp = std::round(u.time_stamp);
        c1 = c2;
        c2 = c3;
        c3 = sup_diff(u, prev);
        ++since_extrapolation;
        ++sol.periods;
        if (c3 < tol) {
            converged = true;
            break;
        }
        // The period map contracts by e^{-lambda}, so the changes become
        // geometric; when two consecutive ratios agree, try a per-cell
        // geometric-series jump. The dynamics are nonsmooth (kinked
        // correctors), so the jump is kept only if the next measured change
        // actually halves -- otherwise it is reverted.
        if (accelerate && since_extrapolation >= 3 && c1 > 0 && sol.periods + 1 < max_periods) {
            double r1 = c2 / c1, r2 = c3 / c2;
            if (r2 > 1e-6 && r2 < 0.999 && std::abs(r2 - r1) < 0.05 * (1.0 - r2)) {
                double w = r2 / (1.0 - r2);
                cand = u;
                for (std::size_t i = 0; i < cand.values.size(); ++i)
                    cand.values[i] += w * (u.values[i] - prev.values[i]);
                cand_next = cand;
                stepper.advance(cand_next, spp);
                cand_next.time_stamp = std::round(cand_next.time_stamp);
                double cchange = sup_diff(cand_next, cand);
                ++sol.periods;
                if (cchange < 0.5 * c3) {
                    u = std::move(cand_next);
                    c1 = c2 = 0;
                    c3 = cchange;
                    since_extrapolation = 1;
                    if (cchange < tol) converged = true;
                } else if (++rejected_jumps >= 3) {
                    accelerate = false;  // grind geometrically instead
                }
            }
        }
    }
    double change = c3;
    sol.residual = change;
    if (!converged)
        throw NumericError("solve_penalized: no convergence after " +
                           std::to_string(sol.periods) +
                           " periods, residual = " + std::to_string(change));

    // Sample the converged period.
    int samples = field.time_dependent ? std::max(1, opt.slice_samples) : 1;
    sol.slices.clear();
    sol.slices.reserve(samples);
    double vmin = u.min(), vmax = u.max();
    long done = 0;
    for (int s = 0; s < samples; ++s) {
        long target = s * spp / samples;
        stepper.advance(u, target - done);
        done = target;
        sol.slices.push_back(u);
        vmin = std::min(vmin, u.min());
        vmax = std::max(vmax, u.max());
    }
    sol.lower = lambda * vmin;
    sol.upper = lambda * vmax;
    sol.osc = sol.upper - sol.lower;
    sol.hbar_estimate = 0.5 * (sol.lower + sol.upper);
    if (checked) sol.osc_bound_ok = sol.osc <= sol.C_osc * pnorm * lambda + 2.0 * grid.max_dx();
    return sol;
}

HbarEstimate estimate_penalized(const VelocityField& field, const Vec& P,
                                const std::vector<double>& lambda_sequence, const GridSpec& grid,
                                const PenalizedOptions& opt, double monotone_slack) {
    if (lambda_sequence.empty()) throw ConfigError("estimate_penalized: empty lambda sequence");
    for (std::size_t i = 0; i < lambda_sequence.size(); ++i) {
        if (lambda_sequence[i] <= 0)
            throw ConfigError("estimate_penalized: lambdas must be positive");
        if (i > 0 && lambda_sequence[i] >= lambda_sequence[i - 1])
            throw ConfigError("estimate_penalized: lambda sequence must be strictly decreasing");
    }
    HbarEstimate est;
    est.P = P;
    est.method = "penalized";
    est.grid = grid;
    est.lambda = lambda_sequence.back();
    if (P.norm() == 0) {
        est.final_state = std::make_shared<GridField>(grid);
        return est;
    }

    PenalizedOptions local = opt;
    GridField warm;
    double prev_lambda = 0;
    CellSolution sol;
    for (double lambda : lambda_sequence) {
        if (!warm.values.empty()) {
            // v scales like 1/lambda near the limit, so rescale the previous
            // corrector before reusing it.
            double s = prev_lambda / lambda;
            for (auto& v : warm.values) v *= s;
            local.warm_start = &warm;
        }
        sol = solve_penalized(field, P, lambda, grid, local);
        est.lambdas.push_back(lambda);
        est.lowers.push_back(sol.lower);
        est.uppers.push_back(sol.upper);
        warm = sol.slices.front();
        prev_lambda = lambda;
    }
    for (std::size_t i = 1; i < est.lambdas.size(); ++i) {
        if (est.lowers[i] < est.lowers[i - 1] - monotone_slack) est.monotone_ok = false;
        if (est.uppers[i] > est.uppers[i - 1] + monotone_slack) est.monotone_ok = false;
    }
    est.value = 0.5 * (est.lowers.back() + est.uppers.back());
    est.bracket_half = 0.5 * (est.uppers.back() - est.lowers.back());
    if (std::isfinite(opt.alpha_star) && opt.alpha_star > 0)
        est.error_bar =
            cosc_constant(field.sup_norm, opt.alpha_star, field.dim) * P.norm() * est.lambda;
    else
        est.error_bar = est.bracket_half;
    est.final_state = std::make_shared<GridField>(std::move(warm));
    return est;
}

HbarEstimate estimate_longtime(const VelocityField& field, const Vec& P, double T,
                               const GridSpec& grid) {
    if (T < 5) throw ConfigError("estimate_longtime: need T >= 5");
    HbarEstimate est;
    est.P = P;
    est.method = "longtime";
    est.grid = grid;
    est.T = T;
    if (P.norm() == 0) return est;
    GridField u = evolve(GridField(grid), field, P, T, 0.0);
    est.value = u.mean() / T;
    est.error_bar = (u.max() - u.min()) / T + 2.0 * (1.0 + field.sup_norm) * P.norm() / T;
    est.final_state = std::make_shared<GridField>(std::move(u));
    return est;
}

std::vector<HbarEstimate> estimate_batch(const VelocityField& field,
                                         const std::vector<Vec>& directions,
                                         const std::vector<double>& lambda_sequence,
                                         const GridSpec& grid, const PenalizedOptions& opt) {
    std::vector<HbarEstimate> out;
    out.reserve(directions.size());
    for (const Vec& P : directions)
        out.push_back(estimate_penalized(field, P, lambda_sequence, grid, opt));
    return out;
}

void export_cell_solution(const CellSolution& sol, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["P"] = std::vector<double>(sol.P.c.begin(), sol.P.c.begin() + sol.P.dim);
    j["lambda"] = sol.lambda;
    j["osc"] = sol.osc;
    j["hbar_estimate"] = sol.hbar_estimate;
    j["residual"] = sol.residual;
    j["periods"] = sol.periods;
    j["slices"] = sol.slices.size();
    if (sol.osc_bound_checked) {
        j["C_osc"] = sol.C_osc;
        j["osc_bound_ok"] = sol.osc_bound_ok;
    }
    std::ofstream out(dir + "/solution.json");
    if (!out) throw ConfigError("cannot open for writing: " + dir + "/solution.json");
    out << j.dump(2) << '\n';
    for (std::size_t s = 0; s < sol.slices.size(); ++s)
        save_grid_field(sol.slices[s], dir + "/slice_" + std::to_string(s) + ".txt");
}

}  // namespace gfront

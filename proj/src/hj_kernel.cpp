#include "gfront/hj_kernel.hpp"

#include <cmath>

#include "gfront/parallel.hpp"

namespace gfront {

namespace {
constexpr std::size_t kCacheByteCap = 1500u * 1024u * 1024u;

double damping_mul(double lambda, double dt) {
    return lambda > 0 ? (1.0 - std::exp(-lambda * dt)) / lambda : dt;
}
}  // namespace

double numerical_hamiltonian(const Vec& p_minus, const Vec& p_plus, const Vec& V, const Vec& P,
                             const std::array<double, kMaxDim>& dissipation, int dim) {
    double q2 = 0, adv = 0, diss = 0;
    for (int i = 0; i < dim; ++i) {
        double q = 0.5 * (p_minus[i] + p_plus[i]) + P[i];
        q2 += q * q;
        adv += V[i] * q;
        diss += dissipation[i] * (p_plus[i] - p_minus[i]);
    }
    return std::sqrt(q2) + adv + 0.5 * diss;
}

Stepper::Stepper(const GridSpec& grid, const VelocityField& field, const Vec& P, double lambda,
                 double dt)
    : grid_(grid), field_(field), P_(P), lambda_(lambda), dt_(dt) {
    if (lambda < 0) throw NumericError("Stepper: lambda must be >= 0");
    double limit = grid.cfl_dt();
    if (dt > limit * (1.0 + 1e-12))
        throw NumericError("CFL violation: dt = " + std::to_string(dt) +
                           ", admissible dt = " + std::to_string(limit));
    if (field.time_dependent) {
        double spp = 1.0 / dt;
        steps_per_period_ = static_cast<int>(std::lround(spp));
        // cache only when steps tile the unit time period exactly
        cache_enabled_ = std::abs(spp - steps_per_period_) < 1e-9 && steps_per_period_ >= 1;
    } else {
        steps_per_period_ = 1;
        cache_enabled_ = true;
    }
    if (cache_enabled_) {
        std::size_t bytes = static_cast<std::size_t>(steps_per_period_) * grid.cells() *
                            grid.dim * sizeof(float);
        if (bytes > kCacheByteCap) cache_enabled_ = false;
    }
    if (cache_enabled_) cache_.resize(static_cast<std::size_t>(steps_per_period_));
}

void Stepper::eval_slice(double t, std::vector<float>& out) const {
    const int dim = grid_.dim;
    out.resize(grid_.cells() * dim);
    for (std::size_t lin = 0; lin < grid_.cells(); ++lin) {
        Vec v = field_.eval(grid_.cell_center(lin), t);
        for (int c = 0; c < dim; ++c) out[lin * dim + c] = static_cast<float>(v[c]);
    }
}

const float* Stepper::slice(double t) const {
    if (!cache_enabled_) return nullptr;
    int k = 0;
    if (field_.time_dependent) {
        long long idx = std::llround(t / dt_);
        k = static_cast<int>(((idx % steps_per_period_) + steps_per_period_) % steps_per_period_);
    }
    if (cache_[k].empty()) eval_slice(field_.time_dependent ? k * dt_ : 0.0, cache_[k]);
    return cache_[k].data();
}

void Stepper::apply(GridField& u, const float* vel, double dt) const {
    const int dim = grid_.dim;
    const double decay = std::exp(-lambda_ * dt);
    const double hmul = damping_mul(lambda_, dt);
    const double t = u.time_stamp;
    static thread_local std::vector<double> scratch;
    scratch.resize(u.values.size());
    const double* in = u.values.data();
    double* out = scratch.data();

    if (dim == 2) {
        const int n0 = grid_.n[0], n1 = grid_.n[1];
        const double inv0 = 1.0 / grid_.dx(0), inv1 = 1.0 / grid_.dx(1);
        const double d0 = grid_.dissipation[0], d1 = grid_.dissipation[1];
        const double P0 = P_[0], P1 = P_[1];
        auto row_range = [&](std::size_t jb, std::size_t je) {
            for (std::size_t j = jb; j < je; ++j) {
                const std::size_t jm = (j == 0 ? n1 - 1 : j - 1) * n0;
                const std::size_t jp = (j + 1 == static_cast<std::size_t>(n1) ? 0 : j + 1) * n0;
                const std::size_t jr = j * n0;
                for (int i = 0; i < n0; ++i) {
                    const int im = i == 0 ? n0 - 1 : i - 1;
                    const int ip = i + 1 == n0 ? 0 : i + 1;
                    const double uc = in[jr + i];
                    const double pxm = (uc - in[jr + im]) * inv0;
                    const double pxp = (in[jr + ip] - uc) * inv0;
                    const double pym = (uc - in[jm + i]) * inv1;
                    const double pyp = (in[jp + i] - uc) * inv1;
                    const double q0 = 0.5 * (pxm + pxp) + P0;
                    const double q1 = 0.5 * (pym + pyp) + P1;
                    double V0, V1;
                    if (vel) {
                        V0 = vel[2 * (jr + i)];
                        V1 = vel[2 * (jr + i) + 1];
                    } else {
                        Vec v = field_.eval(grid_.cell_center(jr + i), t);
                        V0 = v[0];
                        V1 = v[1];
                    }
                    const double H = std::sqrt(q0 * q0 + q1 * q1) + V0 * q0 + V1 * q1 +
                                     0.5 * (d0 * (pxp - pxm) + d1 * (pyp - pym));
                    out[jr + i] = decay * uc + hmul * H;
                }
            }
        };
        parallel_for(static_cast<std::size_t>(n1),
                     [&](std::size_t b, std::size_t e) { row_range(b, e); });
    } else {
        // generic 1D/3D path
        const std::size_t cells = grid_.cells();
        std::array<std::size_t, kMaxDim> stride{1, 1, 1};
        for (int i = 1; i < dim; ++i)
            stride[i] = stride[i - 1] * static_cast<std::size_t>(grid_.n[i - 1]);
        for (std::size_t lin = 0; lin < cells; ++lin) {
            Vec pm = Vec::zero(dim), pp = Vec::zero(dim);
            std::size_t r = lin;
            std::array<int, kMaxDim> idx{};
            for (int i = 0; i < dim; ++i) {
                idx[i] = static_cast<int>(r % grid_.n[i]);
                r /= grid_.n[i];
            }
            for (int i = 0; i < dim; ++i) {
                const int ni = grid_.n[i];
                const std::size_t base = lin - idx[i] * stride[i];
                const std::size_t lm = base + ((idx[i] + ni - 1) % ni) * stride[i];
                const std::size_t lp = base + ((idx[i] + 1) % ni) * stride[i];
                pm[i] = (in[lin] - in[lm]) / grid_.dx(i);
                pp[i] = (in[lp] - in[lin]) / grid_.dx(i);
            }
            Vec V = Vec::zero(dim);
            if (vel)
                for (int c = 0; c < dim; ++c) V[c] = vel[lin * dim + c];
            else
                V = field_.eval(grid_.cell_center(lin), t);
            out[lin] = decay * in[lin] +
                       hmul * numerical_hamiltonian(pm, pp, V, P_, grid_.dissipation, dim);
        }
    }
    u.values.swap(scratch);
    u.time_stamp += dt;
}

void Stepper::advance(GridField& u, long nsteps) const {
    for (long s = 0; s < nsteps; ++s) apply(u, slice(u.time_stamp), dt_);
}

void Stepper::advance_partial(GridField& u, double dt) const {
    if (dt <= 0) return;
    std::vector<float> tmp;
    const float* vel = nullptr;
    if (!field_.time_dependent) {
        vel = slice(0.0);
    }
    if (!vel) {
        eval_slice(u.time_stamp, tmp);
        vel = tmp.data();
    }
    apply(u, vel, dt);
}

void step(GridField& u, const VelocityField& field, const Vec& P, double dt, double lambda) {
    double limit = u.grid.cfl_dt();
    if (dt > limit * (1.0 + 1e-12))
        throw NumericError("CFL violation: dt = " + std::to_string(dt) +
                           ", admissible dt = " + std::to_string(limit));
    Stepper st(u.grid, field, P, lambda, dt);
    st.advance_partial(u, dt);
}

GridField evolve(GridField u0, const VelocityField& field, const Vec& P, double T, double lambda) {
    if (T < u0.time_stamp - 1e-12) throw NumericError("evolve: target time before time_stamp");
    double duration = std::max(0.0, T - u0.time_stamp);
    if (duration == 0) return u0;
    double dtc = u0.grid.cfl_dt();
    double dt = dtc;
    if (field.time_dependent) dt = 1.0 / std::ceil(1.0 / dtc);
    Stepper st(u0.grid, field, P, lambda, dt);
    long nfull = static_cast<long>(std::floor(duration / dt * (1.0 + 1e-14)));
    st.advance(u0, nfull);
    double rem = T - u0.time_stamp;
    if (rem > 1e-12 * (1.0 + std::abs(T))) st.advance_partial(u0, rem);
    u0.time_stamp = T;
    return u0;
}

GridField evolve_custom(GridField u0, const std::function<double(const Vec&)>& hamiltonian,
                        const std::array<double, kMaxDim>& dissipation, double T) {
    const GridSpec& g = u0.grid;
    const int dim = g.dim;
    double s = 0;
    for (int i = 0; i < dim; ++i) s += dissipation[i] / g.dx(i);
    double dt = g.cfl / s;
    long nsteps = static_cast<long>(std::ceil((T - u0.time_stamp) / dt - 1e-12));
    if (nsteps <= 0) return u0;
    dt = (T - u0.time_stamp) / nsteps;

    std::vector<double> scratch(u0.values.size());
    std::array<std::size_t, kMaxDim> stride{1, 1, 1};
    for (int i = 1; i < dim; ++i)
        stride[i] = stride[i - 1] * static_cast<std::size_t>(g.n[i - 1]);
    for (long sdx = 0; sdx < nsteps; ++sdx) {
        const double* in = u0.values.data();
        parallel_for(u0.values.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t lin = b; lin < e; ++lin) {
                Vec q = Vec::zero(dim);
                double diss = 0;
                std::size_t r = lin;
                std::array<int, kMaxDim> idx{};
                for (int i = 0; i < dim; ++i) {
                    idx[i] = static_cast<int>(r % g.n[i]);
                    r /= g.n[i];
                }
                for (int i = 0; i < dim; ++i) {
                    const int ni = g.n[i];
                    const std::size_t base = lin - idx[i] * stride[i];
                    const std::size_t lm = base + ((idx[i] + ni - 1) % ni) * stride[i];
                    const std::size_t lp = base + ((idx[i] + 1) % ni) * stride[i];
                    double pm = (in[lin] - in[lm]) / g.dx(i);
                    double pp = (in[lp] - in[lin]) / g.dx(i);
                    q[i] = 0.5 * (pm + pp);
                    diss += dissipation[i] * (pp - pm);
                }
                scratch[lin] = in[lin] + dt * (hamiltonian(q) + 0.5 * diss);
            }
        });
        u0.values.swap(scratch);
        u0.time_stamp += dt;
    }
    return u0;
}

}  // namespace gfront

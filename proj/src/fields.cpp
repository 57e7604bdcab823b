#include "gfront/fields.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

namespace gfront {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

void check_periodic_profile(const std::function<double(double)>& f, const char* what) {
    for (double s : {0.0, 0.17, 0.43}) {
        if (std::abs(f(s) - f(s + 1.0)) > 1e-12)
            throw ConfigError(std::string(what) + ": profile is not 1-periodic");
    }
}

}  // namespace

double VelocityField::divergence(const Vec& x, double t, double h) const {
    if (div_eval) return div_eval(x, t);
    double d = 0.0;
    for (int i = 0; i < dim; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        d += (eval(xp, t)[i] - eval(xm, t)[i]) / (2.0 * h);
    }
    return d;
}

VelocityField make_zero(int dim) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("zero field: dim must be in [1,3]");
    VelocityField f;
    f.dim = dim;
    f.name = "zero";
    f.divergence_free = true;
    f.eval = [dim](const Vec&, double) { return Vec::zero(dim); };
    f.div_eval = [](const Vec&, double) { return 0.0; };
    return f;
}

VelocityField make_constant(const Vec& c) {
    VelocityField f;
    f.dim = c.dim;
    f.name = "constant";
    std::ostringstream p;
    p << "c=(";
    for (int i = 0; i < c.dim; ++i) p << (i ? "," : "") << c[i];
    p << ")";
    f.params = p.str();
    f.sup_norm = c.norm();
    f.divergence_free = true;
    f.eval = [c](const Vec&, double) { return c; };
    f.div_eval = [](const Vec&, double) { return 0.0; };
    return f;
}

VelocityField make_shear(int axis, double amplitude, std::function<double(double)> profile,
                         std::function<double(double)> profile_deriv, int dim) {
    if (dim < 2 || dim > kMaxDim) throw ConfigError("shear: dim must be 2 or 3");
    if (axis < 0 || axis >= dim) throw ConfigError("shear: axis out of range");
    if (!std::isfinite(amplitude)) throw ConfigError("shear: amplitude not finite");
    double prof_sup = 1.0;
    if (!profile) {
        profile = [](double s) { return std::sin(kTwoPi * s); };
        profile_deriv = [](double s) { return kTwoPi * std::cos(kTwoPi * s); };
    } else {
        check_periodic_profile(profile, "shear");
        prof_sup = 0.0;
        for (int i = 0; i < 4096; ++i) prof_sup = std::max(prof_sup, std::abs(profile(i / 4096.0)));
    }
    int perp = (axis + 1) % dim;
    VelocityField f;
    f.dim = dim;
    f.name = "shear";
    std::ostringstream p;
    p << "axis=" << axis << " amplitude=" << amplitude;
    f.params = p.str();
    f.sup_norm = std::abs(amplitude) * prof_sup;
    f.divergence_free = true;
    f.eval = [axis, perp, amplitude, profile, dim](const Vec& x, double) {
        Vec v = Vec::zero(dim);
        v[axis] = amplitude * profile(x[perp]);
        return v;
    };
    f.div_eval = [](const Vec&, double) { return 0.0; };
    return f;
}

VelocityField make_cellular(double amplitude) {
    if (!std::isfinite(amplitude)) throw ConfigError("cellular: amplitude not finite");
    VelocityField f;
    f.dim = 2;
    f.name = "cellular";
    std::ostringstream p;
    p << "amplitude=" << amplitude;
    f.params = p.str();
    f.sup_norm = std::abs(amplitude);
    f.lipschitz_bound = kTwoPi * std::abs(amplitude);
    f.divergence_free = true;
    double A = amplitude;
    f.eval = [A](const Vec& x, double) {
        double s1 = std::sin(kTwoPi * x[0]), c1 = std::cos(kTwoPi * x[0]);
        double s2 = std::sin(kTwoPi * x[1]), c2 = std::cos(kTwoPi * x[1]);
        return Vec(-A * s1 * c2, A * c1 * s2);
    };
    f.div_eval = [](const Vec&, double) { return 0.0; };
    return f;
}

VelocityField make_traveling_product(double a1, double a2) {
    if (!std::isfinite(a1) || !std::isfinite(a2))
        throw ConfigError("traveling_product: amplitudes not finite");
    VelocityField f;
    f.dim = 2;
    f.name = "traveling_product";
    std::ostringstream p;
    p << "a1=" << a1 << " a2=" << a2;
    f.params = p.str();
    f.sup_norm = kTwoPi * std::abs(a1 * a2);
    f.lipschitz_bound = kTwoPi * kTwoPi * std::abs(a1 * a2);
    f.divergence_free = true;
    f.time_dependent = true;
    f.eval = [a1, a2](const Vec& x, double t) {
        double s = x[0] + t;
        double e1 = a1 * std::sin(kTwoPi * s);
        double de1 = kTwoPi * a1 * std::cos(kTwoPi * s);
        double e2 = a2 * std::sin(kTwoPi * x[1]);
        double de2 = kTwoPi * a2 * std::cos(kTwoPi * x[1]);
        return Vec(-e1 * de2, de1 * e2);
    };
    f.div_eval = [](const Vec&, double) { return 0.0; };
    return f;
}

VelocityField make_builtin(const std::string& family, int dim, const std::vector<double>& params) {
    auto need = [&](std::size_t k) {
        if (params.size() < k)
            throw ConfigError("field family '" + family + "' needs " + std::to_string(k) +
                              " parameter(s)");
    };
    if (family == "zero") return make_zero(dim);
    if (family == "constant") {
        need(static_cast<std::size_t>(dim));
        Vec c = Vec::zero(dim);
        for (int i = 0; i < dim; ++i) c[i] = params[i];
        return make_constant(c);
    }
    if (family == "shear") {
        need(2);
        return make_shear(static_cast<int>(params[0]), params[1], {}, {}, dim);
    }
    if (family == "cellular") {
        need(1);
        if (dim != 2) throw ConfigError("cellular: stream-function family requires dim=2");
        return make_cellular(params[0]);
    }
    if (family == "traveling_product") {
        need(2);
        if (dim != 2) throw ConfigError("traveling_product: stream-function family requires dim=2");
        return make_traveling_product(params[0], params[1]);
    }
    throw ConfigError("unknown field family '" + family + "'");
}

VelocityField shifted_field(const VelocityField& base, std::function<Vec(double)> c,
                            double c_sup_norm) {
    VelocityField f = base;
    f.name = base.name + "_shifted";
    f.sup_norm = base.sup_norm + c_sup_norm;
    f.time_dependent = true;
    auto ev = base.eval;
    f.eval = [ev, c](const Vec& x, double t) { return ev(x, t) - c(t); };
    // shift is x-independent: divergence unchanged
    return f;
}

VelocityField rescaled_field(const VelocityField& base, double eps) {
    if (eps <= 0) throw ConfigError("rescaled_field: eps must be positive");
    VelocityField f = base;
    f.name = base.name + "_eps";
    f.time_dependent = true;  // oscillates in t through t/eps unless base is steady
    if (!base.time_dependent) f.time_dependent = false;
    auto ev = base.eval;
    f.eval = [ev, eps](const Vec& x, double t) { return ev(x * (1.0 / eps), t / eps); };
    if (base.div_eval) {
        auto dv = base.div_eval;
        f.div_eval = [dv, eps](const Vec& x, double t) {
            return dv(x * (1.0 / eps), t / eps) / eps;
        };
    } else {
        f.div_eval = nullptr;
    }
    return f;
}

VelocityField make_sampled_field(int dim, int n, int nt, std::vector<double> values) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("sampled field: dim must be in [1,3]");
    if (n < 2 || nt < 1) throw ConfigError("sampled field: need n >= 2, nt >= 1");
    std::size_t cells = 1;
    for (int i = 0; i < dim; ++i) cells *= static_cast<std::size_t>(n);
    if (values.size() != cells * nt * dim)
        throw ConfigError("sampled field: value count mismatch");
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("sampled field: non-finite sample");

    auto data = std::make_shared<std::vector<double>>(std::move(values));
    double sup = 0.0;
    for (std::size_t i = 0; i + dim <= data->size(); i += dim) {
        double s = 0;
        for (int k = 0; k < dim; ++k) s += sqr((*data)[i + k]);
        sup = std::max(sup, std::sqrt(s));
    }

    auto sample = [data, dim, n, nt](const std::array<int, kMaxDim>& idx, int kt, int comp) {
        std::size_t lin = 0;
        for (int i = dim - 1; i >= 0; --i) lin = lin * n + idx[i];
        std::size_t cells = 1;
        for (int i = 0; i < dim; ++i) cells *= static_cast<std::size_t>(n);
        return (*data)[(static_cast<std::size_t>(kt) * cells + lin) * dim + comp];
    };

    VelocityField f;
    f.dim = dim;
    f.name = "sampled";
    f.sup_norm = sup;
    f.time_dependent = nt > 1;
    f.eval = [sample, dim, n, nt](const Vec& x, double t) {
        // multilinear in space, linear in time, periodic wrap everywhere
        std::array<int, kMaxDim> i0{}, i1{};
        std::array<double, kMaxDim> w{};
        for (int i = 0; i < dim; ++i) {
            double u = wrap_unit(x[i]) * n;
            int a = static_cast<int>(u) % n;
            i0[i] = a;
            i1[i] = (a + 1) % n;
            w[i] = u - std::floor(u);
        }
        double ut = nt > 1 ? wrap_unit(t) * nt : 0.0;
        int k0 = nt > 1 ? static_cast<int>(ut) % nt : 0;
        int k1 = nt > 1 ? (k0 + 1) % nt : 0;
        double wt = nt > 1 ? ut - std::floor(ut) : 0.0;

        Vec out = Vec::zero(dim);
        int corners = 1 << dim;
        for (int m = 0; m < corners; ++m) {
            std::array<int, kMaxDim> idx{};
            double wgt = 1.0;
            for (int i = 0; i < dim; ++i) {
                bool hi = (m >> i) & 1;
                idx[i] = hi ? i1[i] : i0[i];
                wgt *= hi ? w[i] : (1.0 - w[i]);
            }
            for (int comp = 0; comp < dim; ++comp) {
                double v = (1.0 - wt) * sample(idx, k0, comp);
                if (nt > 1) v += wt * sample(idx, k1, comp);
                out[comp] += wgt * v;
            }
        }
        return out;
    };
    return f;
}

VelocityField load_sampled_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sampled field file: " + path);
    int dim, n, nt;
    if (!(in >> dim >> n >> nt)) throw ConfigError("sampled field: bad header in " + path);
    std::size_t cells = 1;
    for (int i = 0; i < dim; ++i) cells *= static_cast<std::size_t>(n);
    std::vector<double> values(cells * nt * dim);
    for (auto& v : values)
        if (!(in >> v)) throw ConfigError("sampled field: truncated data in " + path);
    auto f = make_sampled_field(dim, n, nt, std::move(values));
    f.params = "file=" + path;
    return f;
}

double divergence_norm(const VelocityField& field, double t, int resolution) {
    if (resolution < 16) throw ConfigError("divergence_norm: resolution must be >= 16");
    const int N = field.dim;
    const double h = 1.0 / resolution;
    std::size_t cells = 1;
    for (int i = 0; i < N; ++i) cells *= static_cast<std::size_t>(resolution);
    double acc = 0.0;
    for (std::size_t lin = 0; lin < cells; ++lin) {
        std::size_t r = lin;
        Vec x = Vec::zero(N);
        for (int i = 0; i < N; ++i) {
            int idx = static_cast<int>(r % resolution);
            r /= resolution;
            x[i] = -0.5 + (idx + 0.5) * h;
        }
        acc += std::pow(std::abs(field.divergence(x, t, h)), N);
    }
    acc /= static_cast<double>(cells);
    return std::pow(acc, 1.0 / N);
}

FieldDiagnostics diagnostics(const VelocityField& field, int resolution, double c_I) {
    if (c_I <= 0) throw ConfigError("diagnostics: c_I must be positive");
    const int N = field.dim;
    const double h = 1.0 / resolution;
    FieldDiagnostics d;
    d.c_I = c_I;
    d.mean_V = Vec::zero(N);
    d.x_div_mean = Vec::zero(N);

    const int nt = field.time_dependent ? resolution : 1;
    std::size_t cells = 1;
    for (int i = 0; i < N; ++i) cells *= static_cast<std::size_t>(resolution);

    double alpha_sum = 0.0;
    for (int k = 0; k < nt; ++k) {
        double t = (k + 0.5) / nt;
        double dn = divergence_norm(field, t, resolution);
        d.times.push_back(t);
        d.div_norm.push_back(dn);
        double a = 1.0 / c_I - dn;
        d.alpha.push_back(a);
        alpha_sum += a;

        for (std::size_t lin = 0; lin < cells; ++lin) {
            std::size_t r = lin;
            Vec x = Vec::zero(N);
            for (int i = 0; i < N; ++i) {
                int idx = static_cast<int>(r % resolution);
                r /= resolution;
                x[i] = -0.5 + (idx + 0.5) * h;
            }
            Vec v = field.eval(x, t);
            double dv = field.divergence(x, t, h);
            double w = 1.0 / (static_cast<double>(cells) * nt);
            for (int i = 0; i < N; ++i) {
                d.mean_V[i] += w * v[i];
                d.x_div_mean[i] += w * x[i] * dv;
            }
        }
    }
    d.alpha_star = alpha_sum / nt;
    d.alpha_star_positive = d.alpha_star > 0;
    return d;
}

double default_c_I(int dim) {
    // straight half-cut candidate: (1/2)^{(N-1)/N} / 1
    return std::pow(0.5, (dim - 1.0) / dim);
}

double isoperimetric_candidate_max(int sweep) {
    // N=2 candidate families in the unit square:
    //   straight cuts at fraction a: |E| = a, Per = 1
    //   corner quarter-disks radius r in (0,1): |E| = pi r^2/4, Per = pi r/2
    double best = 0.0;
    for (int i = 1; i < sweep; ++i) {
        double a = static_cast<double>(i) / sweep;
        best = std::max(best, std::sqrt(std::min(a, 1.0 - a)) / 1.0);
        double r = static_cast<double>(i) / sweep;
        double area = kPi * r * r / 4.0;
        double per = kPi * r / 2.0;
        best = std::max(best, std::sqrt(std::min(area, 1.0 - area)) / per);
    }
    return best;
}

}  // namespace gfront

#include "gfront/front_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "gfront/hj_kernel.hpp"

namespace gfront {

namespace {

std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& n, double offset) {
    // keep {y : <n,y> <= offset}
    std::vector<Vec> out;
    const int m = static_cast<int>(poly.size());
    for (int i = 0; i < m; ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % m];
        double da = n.dot(a) - offset, db = n.dot(b) - offset;
        if (da <= 0) out.push_back(a);
        if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
            double s = da / (da - db);
            out.push_back(a + (b - a) * s);
        }
    }
    return out;
}

double linear_slope(const std::vector<double>& t, const std::vector<double>& y) {
    double n = static_cast<double>(t.size());
    if (n < 2) return 0;
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    double denom = n * stt - st * st;
    return denom > 0 ? (n * sty - st * sy) / denom : 0;
}

}  // namespace

double WulffShape::support(const Vec& d) const {
    double s = -std::numeric_limits<double>::infinity();
    for (const Vec& v : vertices) s = std::max(s, d.dot(v));
    return s;
}

bool WulffShape::contains(const Vec& y, double slack) const {
    for (std::size_t i = 0; i < normals.size(); ++i)
        if (normals[i].dot(y) > offsets[i] + slack) return false;
    return true;
}

double WulffShape::distance(const Vec& y, double scale) const {
    bool inside = true;
    for (std::size_t i = 0; i < normals.size(); ++i)
        if (normals[i].dot(y) > scale * offsets[i]) {
            inside = false;
            break;
        }
    if (inside) return 0;
    double best = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(vertices.size());
    for (int i = 0; i < m; ++i) {
        Vec a = vertices[i] * scale, b = vertices[(i + 1) % m] * scale;
        Vec ab = b - a;
        double len2 = ab.dot(ab);
        double s = len2 > 0 ? std::clamp((y - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (y - (a + ab * s)).norm());
    }
    return best;
}

WulffShape wulff_from_table(const EffectiveHamiltonian& table) {
    if (table.directions.empty() || table.directions[0].dim != 2)
        throw ConfigError("wulff_from_table: vertex enumeration implemented for dim 2");
    WulffShape W;
    double hmax = 0;
    for (std::size_t i = 0; i < table.directions.size(); ++i) {
        double h = table.estimates[i].value;
        if (h <= 0)
            throw HypothesisError("wulff_from_table: nonpositive value, front not expanding");
        W.normals.push_back(table.directions[i]);
        W.offsets.push_back(h);
        hmax = std::max(hmax, h);
    }
    // W = {y : <P,y> + h(P) >= 0} = intersection over the fan of
    // {<-P, y> <= h(P)}; clip a big box down.
    double L = 4 * hmax + 1;
    std::vector<Vec> poly = {Vec(-L, -L), Vec(L, -L), Vec(L, L), Vec(-L, L)};
    for (std::size_t i = 0; i < W.normals.size(); ++i)
        poly = clip_halfplane(poly, W.normals[i] * -1.0, W.offsets[i]);
    if (poly.size() < 3) throw NumericError("wulff_from_table: degenerate polygon");
    // The half-space data uses inward normals -P; store the polygon and the
    // outward support description consistently: contains() tests
    // <-P_i, y> <= h_i, so flip normals for the stored tests.
    for (auto& n : W.normals) n = n * -1.0;
    W.vertices = std::move(poly);
    return W;
}

GridField hopf_lax(const GridSpec& grid, const std::function<double(const Vec&)>& u0, double t,
                   const WulffShape& W, int edge_samples, int shells) {
    if (t < 0) throw ConfigError("hopf_lax: t must be >= 0");
    std::vector<Vec> samples;
    Vec origin = Vec::zero(2);
    samples.push_back(origin);
    const int m = static_cast<int>(W.vertices.size());
    for (int shell = 1; shell <= shells; ++shell) {
        double sc = static_cast<double>(shell) / shells;
        for (int i = 0; i < m; ++i) {
            Vec a = W.vertices[i], b = W.vertices[(i + 1) % m];
            for (int q = 0; q < edge_samples; ++q) {
                double fr = static_cast<double>(q) / edge_samples;
                samples.push_back((a + (b - a) * fr) * sc);
            }
        }
    }
    GridField out(grid);
    out.time_stamp = t;
    for (std::size_t lin = 0; lin < grid.cells(); ++lin) {
        Vec x = grid.cell_center(lin);
        double best = -std::numeric_limits<double>::infinity();
        for (const Vec& y : samples) best = std::max(best, u0(x - y * t));
        out.values[lin] = best;
    }
    return out;
}

GridField hopf_lax_ball(const GridSpec& grid, const Vec& c0, double r, double clamp_at, double t,
                        const WulffShape& W) {
    GridField out(grid);
    out.time_stamp = t;
    for (std::size_t lin = 0; lin < grid.cells(); ++lin) {
        Vec x = grid.cell_center(lin);
        double d = t > 0 ? W.distance(x - c0, t) : (x - c0).norm();
        out.values[lin] = std::clamp(r - d, -clamp_at, clamp_at);
    }
    return out;
}

double CellMask::area() const {
    double cell = 1;
    for (int i = 0; i < grid.dim; ++i) cell *= grid.dx(i);
    double c = 0;
    for (auto v : cells) c += v ? 1 : 0;
    return c * cell;
}

CellMask mask_from_indicator(const GridSpec& grid, const std::function<bool(const Vec&)>& inside) {
    CellMask m(grid);
    for (std::size_t lin = 0; lin < grid.cells(); ++lin)
        m.cells[lin] = inside(grid.cell_center(lin)) ? 1 : 0;
    return m;
}

CellMask mask_of(const GridField& u) {
    CellMask m(u.grid);
    for (std::size_t lin = 0; lin < u.values.size(); ++lin)
        m.cells[lin] = u.values[lin] >= 0 ? 1 : 0;
    return m;
}

namespace {

/// Clamped signed distance to the mask boundary (positive inside).
GridField clamped_signed_distance(const CellMask& K, double clamp) {
    const GridSpec& g = K.grid;
    if (g.dim != 2) throw ConfigError("propagate_front: implemented for dim 2");
    const int n0 = g.n[0], n1 = g.n[1];
    bool any = false, all = true;
    for (auto v : K.cells) {
        any = any || v != 0;
        all = all && v != 0;
    }
    if (!any) throw ConfigError("propagate_front: empty seed mask");
    if (all) throw ConfigError("propagate_front: seed mask covers the whole box");

    std::vector<Vec> boundary;
    auto at = [&](int i, int j) {
        i = std::clamp(i, 0, n0 - 1);
        j = std::clamp(j, 0, n1 - 1);
        return K.cells[static_cast<std::size_t>(j) * n0 + i];
    };
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n0; ++i) {
            std::uint8_t c = at(i, j);
            if (at(i - 1, j) != c || at(i + 1, j) != c || at(i, j - 1) != c || at(i, j + 1) != c) {
                if (c) boundary.push_back(g.cell_center(static_cast<std::size_t>(j) * n0 + i));
            }
        }
    GridField u(g);
    for (std::size_t lin = 0; lin < g.cells(); ++lin) {
        Vec x = g.cell_center(lin);
        double d = clamp + 1;
        for (const Vec& b : boundary) {
            double dd = (x - b).norm();
            if (dd < d) d = dd;
        }
        u.values[lin] = K.cells[lin] ? std::min(d, clamp) : -std::min(d, clamp);
    }
    return u;
}

/// Embed into a box twice as large (same spacing), filling with `fill`.
GridField embed_double(const GridField& u, double fill) {
    const GridSpec& g = u.grid;
    GridSpec big = g;
    for (int i = 0; i < g.dim; ++i) {
        big.n[i] = 2 * g.n[i];
        big.length[i] = 2 * g.length[i];
        big.origin[i] = g.origin[i] - 0.5 * g.length[i];
    }
    GridField out(big, fill);
    out.time_stamp = u.time_stamp;
    const int n0 = g.n[0], n1 = g.n[1];
    const int off0 = n0 / 2, off1 = n1 / 2;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n0; ++i)
            out.values[static_cast<std::size_t>(j + off1) * big.n[0] + (i + off0)] =
                u.values[static_cast<std::size_t>(j) * n0 + i];
    return out;
}

double front_extent(const GridField& u) {
    double ext = 0;
    for (std::size_t lin = 0; lin < u.values.size(); ++lin)
        if (u.values[lin] >= 0) {
            Vec x = u.grid.cell_center(lin);
            for (int i = 0; i < u.grid.dim; ++i) ext = std::max(ext, std::abs(x[i]));
        }
    return ext;
}

}  // namespace

std::vector<FrontState> propagate_front(const VelocityField& field, const CellMask& K0,
                                        const std::vector<double>& times,
                                        const FrontOptions& opt) {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] < 0 || (i > 0 && times[i] <= times[i - 1]))
            throw ConfigError("propagate_front: times must be increasing and nonnegative");
    GridField u = clamped_signed_distance(K0, opt.clamp);
    const double speed = 1.0 + field.sup_norm;
    if (!opt.grow_window && !times.empty()) {
        double need = front_extent(u) + speed * times.back();
        double half = 0.5 * u.grid.length[0];
        if (need > half)
            throw ConfigError("propagate_front: box too small, need half-length >= " +
                              std::to_string(need));
    }
    GridSpec gs = u.grid;
    gs.set_dissipation(field);
    u.grid = gs;

    std::vector<FrontState> out;
    Vec P0 = Vec::zero(field.dim);
    for (double tnext : times) {
        // grow the window so the front cannot reach the boundary
        while (opt.grow_window) {
            double half = 0.5 * u.grid.length[0];
            double projected = front_extent(u) + speed * (tnext - u.time_stamp) + opt.clamp;
            if (projected < (1.0 - opt.margin_fraction) * half) break;
            u = embed_double(u, -opt.clamp);
        }
        u = evolve(std::move(u), field, P0, tnext, 0.0);
        FrontState st;
        st.t = tnext;
        st.K = mask_of(u);
        st.u = u;
        out.push_back(std::move(st));
    }
    return out;
}

InclusionReport inclusion_deviation(const std::vector<FrontState>& states, const WulffShape& W,
                                    double slope_cap) {
    InclusionReport rep;
    for (const FrontState& st : states) {
        double t = st.t;
        const GridSpec& g = st.K.grid;
        // outer: C_out = max_d sigma_K(d) / sigma_W(d) - t over the fan
        double cout = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < W.normals.size(); ++i) {
            Vec d = W.normals[i];
            double sk = -std::numeric_limits<double>::infinity();
            for (std::size_t lin = 0; lin < st.K.cells.size(); ++lin)
                if (st.K.cells[lin]) sk = std::max(sk, d.dot(g.cell_center(lin)));
            double sw = W.support(d);
            if (sw <= 0) throw NumericError("inclusion_deviation: degenerate support");
            cout = std::max(cout, sk / sw - t);
        }
        // inner: smallest C >= 0 with (t - C t^{2/3}) W inside the mask,
        // tested on grid cells strictly inside the scaled polygon.
        double slack = 1.5 * g.max_dx();
        auto contained = [&](double scale) {
            if (scale <= 0) return true;
            const int n0 = g.n[0], n1 = g.n[1];
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n0; ++i) {
                    std::size_t lin = static_cast<std::size_t>(j) * n0 + i;
                    if (st.K.cells[lin]) continue;
                    Vec x = g.cell_center(lin);
                    bool inside = true;
                    for (std::size_t q = 0; q < W.normals.size(); ++q)
                        if (W.normals[q].dot(x) > scale * W.offsets[q] - slack) {
                            inside = false;
                            break;
                        }
                    if (inside) return false;  // uncovered interior point
                }
            return true;
        };
        double t23 = std::pow(t, 2.0 / 3.0);
        double cin = 0;
        if (!contained(t)) {
            double lo = 0, hi = t / std::max(t23, 1e-12);
            for (int it = 0; it < 50; ++it) {
                double mid = 0.5 * (lo + hi);
                (contained(t - mid * t23) ? hi : lo) = mid;
            }
            cin = hi;
        }
        rep.times.push_back(t);
        rep.c_out.push_back(cout);
        rep.c_in.push_back(cin);
    }
    rep.c_out_slope = linear_slope(rep.times, rep.c_out);
    rep.c_in_slope = linear_slope(rep.times, rep.c_in);
    rep.bounded = rep.c_out_slope <= slope_cap && rep.c_in_slope <= slope_cap;
    return rep;
}

AreaFractionTrace area_fraction_trace(const VelocityField& field, const GridField& z0,
                                      double theta, double T, double c_I, double slack,
                                      int samples_per_unit) {
    const GridSpec& g = z0.grid;
    if (c_I <= 0) c_I = default_c_I(field.dim);
    if (slack < 0) slack = 3.0 * g.max_dx();
    auto rho_of = [&](const GridField& z) {
        double cell = 1;
        for (int i = 0; i < g.dim; ++i) cell *= g.dx(i) / g.length[i];
        double c = 0;
        for (double v : z.values) c += v < theta ? 1 : 0;
        return c * cell;
    };
    AreaFractionTrace tr;
    tr.theta = theta;
    FieldDiagnostics diag = diagnostics(field, 64, c_I);
    double amin = *std::min_element(diag.alpha.begin(), diag.alpha.end());
    if (amin < -1e-9)
        throw HypothesisError("area_fraction_trace: alpha(t) must be nonnegative");
    if (diag.alpha_star <= 0)
        throw HypothesisError("area_fraction_trace: alpha* must be positive");
    tr.alpha_star = diag.alpha_star;
    tr.t_star = 1.0 + field.dim / (std::pow(2.0, 1.0 / field.dim) * diag.alpha_star);

    GridField z = z0;
    double rho0 = rho_of(z);
    if (rho0 >= 0.5) throw HypothesisError("area_fraction_trace: need rho(0) < 1/2");

    auto alpha_at = [&](double t) {
        // diag.alpha sampled at diag.times (midpoints of [0,1]); periodic
        double s = wrap_unit(t);
        std::size_t n = diag.times.size();
        double pos = s * n;  // times are (i+0.5)/n
        long i = std::lround(pos - 0.5);
        i = ((i % static_cast<long>(n)) + n) % n;
        return diag.alpha[static_cast<std::size_t>(i)];
    };

    Vec P0 = Vec::zero(field.dim);
    long total = std::lround(std::ceil(T * samples_per_unit));
    tr.times.push_back(0);
    tr.rho.push_back(rho0);
    tr.alpha.push_back(alpha_at(0));
    for (long k = 1; k <= total; ++k) {
        double t = static_cast<double>(k) / samples_per_unit;
        z = evolve(std::move(z), field, P0, t, 0.0);
        double r = rho_of(z);
        tr.times.push_back(t);
        tr.rho.push_back(r);
        tr.alpha.push_back(alpha_at(t));
        if (r == 0 && tr.zero_time < 0) tr.zero_time = t;
        if (r > tr.rho[tr.rho.size() - 2] + 1e-12) tr.monotone = false;
        if (r == 0 && t > tr.t_star + 1) break;  // settled
    }
    // pairwise inequality with trapezoid quadrature of alpha * rho^{(N-1)/N}
    const double ex = (field.dim - 1.0) / field.dim;
    std::vector<double> integrand(tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        integrand[i] = tr.alpha[i] * std::pow(tr.rho[i], ex);
    std::vector<double> cum(tr.times.size(), 0.0);
    for (std::size_t i = 1; i < tr.times.size(); ++i)
        cum[i] = cum[i - 1] + 0.5 * (integrand[i] + integrand[i - 1]) *
                                  (tr.times[i] - tr.times[i - 1]);
    for (std::size_t a = 0; a < tr.times.size(); ++a)
        for (std::size_t b = a + 1; b < tr.times.size(); ++b) {
            double defect = (tr.rho[b] - tr.rho[a]) + (cum[b] - cum[a]) - slack;
            if (defect > 0) {
                tr.pairwise_ok = false;
                tr.worst_pair_defect = std::max(tr.worst_pair_defect, defect);
            }
        }
    tr.extinct_by_tstar = tr.zero_time >= 0 && tr.zero_time <= tr.t_star + 1;
    return tr;
}

void export_wulff_csv(const WulffShape& W, const std::string& vertex_path,
                      const std::string& support_path) {
    {
        std::ofstream out(vertex_path);
        if (!out) throw ConfigError("cannot open for writing: " + vertex_path);
        out << std::setprecision(12) << "x,y\n";
        for (const Vec& v : W.vertices) out << v[0] << ',' << v[1] << '\n';
    }
    std::ofstream out(support_path);
    if (!out) throw ConfigError("cannot open for writing: " + support_path);
    out << std::setprecision(12) << "angle,support\n";
    const int m = 64;
    for (int i = 0; i < m; ++i) {
        double th = 2 * kPi * i / m;
        Vec d = Vec::zero(2);
        d[0] = std::cos(th);
        d[1] = std::sin(th);
        out << th << ',' << W.support(d) << '\n';
    }
}

void export_front_masks(const std::vector<FrontState>& states, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json idx;
    idx["times"] = nlohmann::json::array();
    idx["files"] = nlohmann::json::array();
    for (std::size_t s = 0; s < states.size(); ++s) {
        const CellMask& K = states[s].K;
        std::string name = "mask_" + std::to_string(s) + ".pbm";
        std::ofstream out(dir + "/" + name);
        if (!out) throw ConfigError("cannot open for writing: " + dir + "/" + name);
        out << "P1\n" << K.grid.n[0] << ' ' << K.grid.n[1] << '\n';
        for (int j = 0; j < K.grid.n[1]; ++j) {
            for (int i = 0; i < K.grid.n[0]; ++i)
                out << (K.cells[static_cast<std::size_t>(j) * K.grid.n[0] + i] ? '1' : '0')
                    << (i + 1 == K.grid.n[0] ? '\n' : ' ');
        }
        idx["times"].push_back(states[s].t);
        idx["files"].push_back(name);
        idx["box"] = K.grid.length[0];
        idx["n"] = K.grid.n[0];
    }
    std::ofstream out(dir + "/index.json");
    out << idx.dump(2) << '\n';
}

void export_inclusion_csv(const InclusionReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << std::setprecision(12) << "t,c_out,c_in\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        out << rep.times[i] << ',' << rep.c_out[i] << ',' << rep.c_in[i] << '\n';
}

}  // namespace gfront

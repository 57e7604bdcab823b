#include "gfront/grid.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace gfront {

GridSpec GridSpec::unit_cell(const VelocityField& field, int cells_per_axis, double cfl) {
    if (cells_per_axis < 2) throw ConfigError("GridSpec: need at least 2 cells per axis");
    GridSpec g;
    g.dim = field.dim;
    for (int i = 0; i < g.dim; ++i) {
        g.n[i] = cells_per_axis;
        g.length[i] = 1.0;
        g.origin[i] = -0.5;
    }
    g.cfl = cfl;
    g.set_dissipation(field);
    return g;
}

GridSpec GridSpec::macro_box(int dim, double box_length, int cells_per_axis, double cfl) {
    GridSpec g;
    g.dim = dim;
    for (int i = 0; i < dim; ++i) {
        g.n[i] = cells_per_axis;
        g.length[i] = box_length;
        g.origin[i] = -box_length / 2.0;
    }
    g.cfl = cfl;
    return g;
}

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }
double GridField::max() const { return *std::max_element(values.begin(), values.end()); }
double GridField::mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

double sup_diff(const GridField& a, const GridField& b) {
    if (a.values.size() != b.values.size()) throw NumericError("sup_diff: grid size mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = std::abs(a.values[i] - b.values[i]);
        if (std::isnan(d)) throw NumericError("sup_diff: non-finite values");
        if (d > m) m = d;
    }
    return m;
}

void save_grid_field(const GridField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "gfront-grid 1\n";
    out << f.grid.dim;
    for (int i = 0; i < f.grid.dim; ++i) out << ' ' << f.grid.n[i];
    out << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < f.grid.dim; ++i)
        out << f.grid.length[i] << ' ' << f.grid.origin[i] << '\n';
    out << f.time_stamp << '\n';
    for (std::size_t i = 0; i < f.values.size(); ++i)
        out << f.values[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
    out << '\n';
}

GridField load_grid_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string magic;
    int version;
    in >> magic >> version;
    if (magic != "gfront-grid" || version != 1)
        throw ConfigError("not a gfront grid file: " + path);
    GridSpec g;
    in >> g.dim;
    if (g.dim < 1 || g.dim > kMaxDim) throw ConfigError("grid file: bad dim");
    for (int i = 0; i < g.dim; ++i) in >> g.n[i];
    for (int i = 0; i < g.dim; ++i) in >> g.length[i] >> g.origin[i];
    GridField f(g);
    in >> f.time_stamp;
    for (auto& v : f.values)
        if (!(in >> v)) throw ConfigError("grid file: truncated data");
    return f;
}

}  // namespace gfront

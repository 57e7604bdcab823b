#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "gfront/common.hpp"
#include "gfront/fields.hpp"

namespace gfront {

/// Uniform periodic cell-centered grid. The unit problems use a single
/// period cell (length 1); front experiments use larger macro boxes.
struct GridSpec {
    int dim = 2;
    std::array<int, kMaxDim> n{128, 128, 1};
    std::array<double, kMaxDim> length{1.0, 1.0, 1.0};
    std::array<double, kMaxDim> origin{-0.5, -0.5, -0.5};
    double cfl = 0.5;
    std::array<double, kMaxDim> dissipation{1.0, 1.0, 1.0};

    double dx(int i) const { return length[i] / n[i]; }
    double max_dx() const {
        double m = 0;
        for (int i = 0; i < dim; ++i) m = std::max(m, dx(i));
        return m;
    }
    std::size_t cells() const {
        std::size_t c = 1;
        for (int i = 0; i < dim; ++i) c *= static_cast<std::size_t>(n[i]);
        return c;
    }
    /// Largest admissible explicit time step: cfl / sum_i dissipation[i]/dx[i].
    double cfl_dt() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += dissipation[i] / dx(i);
        return cfl / s;
    }
    /// Monotonicity requires dissipation[i] >= 1 + max |V_i|; uses the
    /// declared sup-norm bound of the field (plus |P| enters H only through
    /// q and is already covered by the gradient term's unit slope).
    void set_dissipation(const VelocityField& field) {
        for (int i = 0; i < dim; ++i) dissipation[i] = 1.0 + field.sup_norm;
    }

    Vec cell_center(std::size_t lin) const {
        Vec x = Vec::zero(dim);
        std::size_t r = lin;
        for (int i = 0; i < dim; ++i) {
            int idx = static_cast<int>(r % static_cast<std::size_t>(n[i]));
            r /= static_cast<std::size_t>(n[i]);
            x[i] = origin[i] + (idx + 0.5) * dx(i);
        }
        return x;
    }

    /// Single-period unit cell Q_1 with dissipation sized for `field`.
    static GridSpec unit_cell(const VelocityField& field, int cells_per_axis, double cfl = 0.5);

    /// Macro box [-L/2, L/2]^dim.
    static GridSpec macro_box(int dim, double box_length, int cells_per_axis, double cfl = 0.5);
};

/// Scalar field sampled at cell centers, periodic indexing.
struct GridField {
    GridSpec grid;
    std::vector<double> values;
    double time_stamp = 0.0;

    GridField() = default;
    explicit GridField(const GridSpec& g, double fill = 0.0)
        : grid(g), values(g.cells(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double min() const;
    double max() const;
    double mean() const;

    /// Fill from a function of the cell center.
    template <class F>
    void assign(F&& f) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.cell_center(i));
    }
};

/// max |a - b| cellwise; grids must match.
double sup_diff(const GridField& a, const GridField& b);

/// Deterministic text serialization with header {dim, n, time_stamp}.
void save_grid_field(const GridField& f, const std::string& path);
GridField load_grid_field(const std::string& path);

}  // namespace gfront

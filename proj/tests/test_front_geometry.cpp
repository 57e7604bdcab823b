#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gfront/front_geometry.hpp"

using namespace gfront;

namespace {

EffectiveHamiltonian constant_drift_table(const Vec& c, int m) {
    // hand-built exact table for H(P) = |P| + <c,P> on the fan
    EffectiveHamiltonian tab;
    tab.directions = fan_directions(2, m);
    for (const Vec& P : tab.directions) {
        HbarEstimate e;
        e.P = P;
        e.value = 1.0 + c.dot(P);
        tab.estimates.push_back(e);
    }
    return tab;
}

}  // namespace

TEST_CASE("Wulff shape of the Euclidean norm circumscribes the unit disk") {
    EffectiveHamiltonian tab = constant_drift_table(Vec(0, 0), 16);
    WulffShape W = wulff_from_table(tab);
    REQUIRE(W.vertices.size() >= 3);
    double hi = 1.0 / std::cos(kPi / 16);
    for (int k = 0; k < 64; ++k) {
        double a = 2 * kPi * k / 64;
        Vec d(std::cos(a), std::sin(a));
        double s = W.support(d);
        CHECK(s >= 1.0 - 1e-12);
        CHECK(s <= hi + 1e-12);
    }
    // vertices sit at the circumradius, disk points are inside
    for (const Vec& v : W.vertices) CHECK(v.norm() == doctest::Approx(hi).epsilon(1e-10));
    CHECK(W.contains(Vec(0.99, 0)));
    CHECK(W.contains(Vec(0, 0)));
    CHECK_FALSE(W.contains(Vec(1.2, 0)));
}

TEST_CASE("Wulff shape of a constant drift is the shifted unit body") {
    Vec c(0.3, -0.1);
    WulffShape W = wulff_from_table(constant_drift_table(c, 32));
    double hi = 1.0 / std::cos(kPi / 32);
    for (int k = 0; k < 32; ++k) {
        double a = 2 * kPi * (k + 0.5) / 32;
        Vec d(std::cos(a), std::sin(a));
        double s = W.support(d);
        CHECK(s >= 1.0 - c.dot(d) - 1e-10);
        CHECK(s <= hi - c.dot(d) + 1e-10);
    }
    CHECK(W.contains(Vec(-c[0], -c[1])));  // the center of the shifted body
}

TEST_CASE("degenerate tables are rejected") {
    // drift faster than the laminar speed: H(P) < 0 in the upwind direction
    CHECK_THROWS_AS(wulff_from_table(constant_drift_table(Vec(2, 0), 16)), HypothesisError);
}

TEST_CASE("Hopf-Lax formula on affine data is exact") {
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0.2, 0.1), 16));
    GridSpec g = GridSpec::macro_box(2, 4.0, 32);
    Vec q(0.7, -0.4);
    double b = 0.3, t = 1.3;
    auto u0 = [&](const Vec& x) { return q.dot(x) + b; };
    GridField u = hopf_lax(g, u0, t, W);
    // sup_y <q, x - t y> + b = <q,x> + b + t * support(-q)
    double gain = t * W.support(Vec(-q[0], -q[1]));
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        Vec x = u.grid.cell_center(i);
        CHECK(u.values[i] == doctest::Approx(q.dot(x) + b + gain).epsilon(1e-13));
    }
}

TEST_CASE("Hopf-Lax at time zero returns the data") {
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0, 0), 16));
    GridSpec g = GridSpec::macro_box(2, 4.0, 32);
    auto u0 = [](const Vec& x) { return std::sin(x[0]) - 0.5 * x[1]; };
    GridField u = hopf_lax(g, u0, 0.0, W);
    for (std::size_t i = 0; i < u.values.size(); ++i)
        CHECK(u.values[i] == doctest::Approx(u0(u.grid.cell_center(i))).epsilon(1e-14));
}

TEST_CASE("sampled Hopf-Lax agrees with the exact ball formula on cones") {
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0, 0), 64));
    GridSpec g = GridSpec::macro_box(2, 8.0, 64);
    double t = 1.5, clamp = 100.0;
    auto u0 = [](const Vec& x) { return -x.norm(); };
    GridField a = hopf_lax(g, u0, t, W, 16, 16);
    GridField exact = hopf_lax_ball(g, Vec(0, 0), 0.0, clamp, t, W);
    // shell sampling resolves the sup to O(t / shells)
    CHECK(sup_diff(a, exact) < 1.2 * t / 16);
}

TEST_CASE("exact ball Hopf-Lax closed forms") {
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0, 0), 32));
    GridSpec g = GridSpec::macro_box(2, 12.0, 48);
    double r = 0.5, clamp = 1.0, t = 2.0;
    GridField u = hopf_lax_ball(g, Vec(0, 0), r, clamp, t, W);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        Vec x = u.grid.cell_center(i);
        // along a fan direction the polygon edge is at distance t, so the
        // distance to tW reduces to |x| - t outside
        double d = W.distance(x, t);
        double expect = std::min(std::max(r - d, -clamp), clamp);
        CHECK(u.values[i] == doctest::Approx(expect).epsilon(1e-13));
        if (x[1] == 0 && x[0] > t + r)
            CHECK(u.values[i] ==
                  doctest::Approx(std::max(r - (x[0] - t), -clamp)).epsilon(1e-12));
    }
    GridField u0 = hopf_lax_ball(g, Vec(0.5, -0.25), r, clamp, 0.0, W);
    for (std::size_t i = 0; i < u0.values.size(); ++i) {
        Vec x = u0.grid.cell_center(i);
        double expect = std::min(std::max(r - (x - Vec(0.5, -0.25)).norm(), -clamp), clamp);
        CHECK(u0.values[i] == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("masks measure area") {
    GridSpec g = GridSpec::macro_box(2, 2.0, 128);
    CellMask sq = mask_from_indicator(
        g, [](const Vec& x) { return std::abs(x[0]) < 0.25 && std::abs(x[1]) < 0.25; });
    CHECK(sq.area() == doctest::Approx(0.25).epsilon(2e-2));
    GridField u(g);
    u.assign([](const Vec& x) { return 0.3 - x.norm(); });
    CellMask disk = mask_of(u);
    CHECK(disk.area() == doctest::Approx(kPi * 0.09).epsilon(3e-2));
}

TEST_CASE("front of a ball seed under zero drift grows at unit speed") {
    VelocityField f = make_zero(2);
    GridSpec g = GridSpec::macro_box(2, 10.0, 320);
    double r0 = 0.5;
    CellMask K0 = mask_from_indicator(g, [&](const Vec& x) { return x.norm() <= r0; });
    FrontOptions opt;
    opt.grow_window = false;
    std::vector<FrontState> states = propagate_front(f, K0, {1.0, 2.0}, opt);
    REQUIRE(states.size() == 2);
    double dx = g.max_dx();
    for (const FrontState& st : states) {
        double r = r0 + st.t;
        for (std::size_t i = 0; i < st.K.cells.size(); ++i) {
            Vec x = st.u.grid.cell_center(i);
            if (std::abs(x.norm() - r) < 5 * dx) continue;  // boundary band
            CHECK(static_cast<bool>(st.K.cells[i]) == (x.norm() < r));
        }
    }
    CHECK(states[0].K.area() < states[1].K.area());
}

TEST_CASE("front under constant drift recenters at -c t") {
    Vec c(0.3, 0.0);
    VelocityField f = make_constant(c);
    GridSpec g = GridSpec::macro_box(2, 10.0, 320);
    double r0 = 0.5, T = 2.0;
    CellMask K0 = mask_from_indicator(g, [&](const Vec& x) { return x.norm() <= r0; });
    FrontOptions opt;
    opt.grow_window = false;
    std::vector<FrontState> states = propagate_front(f, K0, {T}, opt);
    double dx = g.max_dx();
    Vec center(-c[0] * T, -c[1] * T);
    double r = r0 + T;
    for (std::size_t i = 0; i < states[0].K.cells.size(); ++i) {
        Vec x = states[0].u.grid.cell_center(i);
        double d = (x - center).norm();
        if (std::abs(d - r) < 5 * dx) continue;
        CHECK(static_cast<bool>(states[0].K.cells[i]) == (d < r));
    }
}

TEST_CASE("inclusion principle for nested seeds") {
    VelocityField f = make_cellular(1.0);
    GridSpec g = GridSpec::macro_box(2, 12.0, 256);
    CellMask small = mask_from_indicator(g, [](const Vec& x) { return x.norm() <= 0.4; });
    CellMask big = mask_from_indicator(
        g, [](const Vec& x) { return std::abs(x[0]) < 0.8 && std::abs(x[1]) < 0.8; });
    FrontOptions opt;
    opt.grow_window = false;
    std::vector<FrontState> a = propagate_front(f, small, {0.5, 1.0}, opt);
    std::vector<FrontState> b = propagate_front(f, big, {0.5, 1.0}, opt);
    for (std::size_t s = 0; s < a.size(); ++s)
        for (std::size_t i = 0; i < a[s].K.cells.size(); ++i)
            if (a[s].K.cells[i]) CHECK(b[s].K.cells[i]);
}

TEST_CASE("empty and full seeds are rejected") {
    GridSpec g = GridSpec::macro_box(2, 4.0, 32);
    CellMask empty(g);
    CHECK_THROWS_AS(propagate_front(make_zero(2), empty, {1.0}), ConfigError);
    CellMask full(g);
    std::fill(full.cells.begin(), full.cells.end(), 1);
    CHECK_THROWS_AS(propagate_front(make_zero(2), full, {1.0}), ConfigError);
}

TEST_CASE("snapshot times must increase") {
    GridSpec g = GridSpec::macro_box(2, 4.0, 64);
    CellMask K0 = mask_from_indicator(g, [](const Vec& x) { return x.norm() <= 0.5; });
    CHECK_THROWS_AS(propagate_front(make_zero(2), K0, {2.0, 1.0}), ConfigError);
}

TEST_CASE("deviation constants of the unit-drift front stay bounded") {
    VelocityField f = make_zero(2);
    GridSpec g = GridSpec::macro_box(2, 16.0, 384);
    CellMask K0 = mask_from_indicator(g, [](const Vec& x) { return x.norm() <= 0.5; });
    FrontOptions opt;
    opt.grow_window = false;
    std::vector<FrontState> states = propagate_front(f, K0, {2.0, 4.0, 6.0}, opt);
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0, 0), 64));
    InclusionReport rep = inclusion_deviation(states, W);
    REQUIRE(rep.times.size() == 3);
    for (double c : rep.c_out) CHECK(c < 1.0);  // K(t) within (t + seed + O(dx)) W
    for (double c : rep.c_in) CHECK(c >= 0.0);
    CHECK(rep.bounded);
}

TEST_CASE("area fraction of a shrinking disk obeys the decay law") {
    // V = 0: alpha = sqrt(2) and the disk of area 1/4 shrinks at unit speed,
    // vanishing at t = r = 1/(2 sqrt(pi)) well before t* = 1 + sqrt(2)
    VelocityField f = make_zero(2);
    GridSpec g = GridSpec::unit_cell(f, 128);
    double r = std::sqrt(0.25 / kPi);
    GridField z0(g);
    z0.assign([&](const Vec& x) { return x.norm() - r; });
    AreaFractionTrace tr = area_fraction_trace(f, z0, 0.0, 2.0);
    CHECK(tr.alpha_star == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    // t* = 1 + N / (2^{1/N} alpha*) = 1 + 2 / (sqrt(2) sqrt(2)) = 2
    CHECK(tr.t_star == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.rho[0] == doctest::Approx(0.25).epsilon(5e-2));
    CHECK(tr.monotone);
    CHECK(tr.pairwise_ok);
    CHECK(tr.extinct_by_tstar);
    CHECK(tr.zero_time > 0);
    CHECK(tr.zero_time <= r + 0.1);
    double dx = g.max_dx();
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        // closed-form decay bound from d(rho)/dt <= -alpha* rho^{1/2}
        double root = std::max(std::sqrt(tr.rho[0]) - 0.5 * std::sqrt(2.0) * tr.times[i], 0.0);
        CHECK(tr.rho[i] <= root * root + 6 * dx);
    }
}

TEST_CASE("area fraction decays under cellular stirring") {
    VelocityField f = make_cellular(2.0);
    GridSpec g = GridSpec::unit_cell(f, 96);
    GridField z0(g);
    z0.assign([](const Vec& x) { return x.norm() - 0.25; });
    AreaFractionTrace tr = area_fraction_trace(f, z0, 0.0, 3.0);
    CHECK(tr.monotone);
    CHECK(tr.pairwise_ok);
    CHECK(tr.extinct_by_tstar);
}

TEST_CASE("area fraction hypothesis requires an initially small set") {
    VelocityField f = make_zero(2);
    GridSpec g = GridSpec::unit_cell(f, 32);
    GridField z0(g, -1.0);  // {z < 0} covers the whole cell
    CHECK_THROWS_AS(area_fraction_trace(f, z0, 0.0, 1.0), HypothesisError);
}

TEST_CASE("geometry exports produce the documented files") {
    WulffShape W = wulff_from_table(constant_drift_table(Vec(0.1, 0), 16));
    std::string dir = "front_export_test";
    std::filesystem::create_directories(dir);
    export_wulff_csv(W, dir + "/vertices.csv", dir + "/support.csv");
    CHECK(std::filesystem::exists(dir + "/vertices.csv"));
    CHECK(std::filesystem::exists(dir + "/support.csv"));

    VelocityField f = make_zero(2);
    GridSpec g = GridSpec::macro_box(2, 6.0, 96);
    CellMask K0 = mask_from_indicator(g, [](const Vec& x) { return x.norm() <= 0.5; });
    FrontOptions opt;
    opt.grow_window = false;
    std::vector<FrontState> states = propagate_front(f, K0, {1.0}, opt);
    export_front_masks(states, dir + "/masks");
    CHECK(std::filesystem::exists(dir + "/masks/index.json"));
    CHECK(std::filesystem::exists(dir + "/masks/mask_0.pbm"));
    std::ifstream pbm(dir + "/masks/mask_0.pbm");
    std::string magic;
    pbm >> magic;
    CHECK(magic == "P1");

    InclusionReport rep = inclusion_deviation(states, W);
    export_inclusion_csv(rep, dir + "/inclusion.csv");
    CHECK(std::filesystem::exists(dir + "/inclusion.csv"));
    std::filesystem::remove_all(dir);
}

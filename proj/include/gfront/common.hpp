#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gfront {

constexpr int kMaxDim = 3;
constexpr double kPi = 3.14159265358979323846;

/// Small fixed-capacity vector for spatial points and directions (N <= 3).
struct Vec {
    std::array<double, kMaxDim> c{0.0, 0.0, 0.0};
    int dim = 2;

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0.0}, dim(2) {}
    Vec(double x, double y, double z) : c{x, y, z}, dim(3) {}
    static Vec zero(int d) {
        Vec v;
        v.dim = d;
        return v;
    }

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] += o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] -= o.c[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] *= s;
        return r;
    }
    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm_inf() const {
        double m = 0;
        for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
        return m;
    }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

/// Numeric failure distinct from configuration errors (maps to a separate
/// process exit code in the CLI).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double sqr(double x) { return x * x; }

/// Positive fractional part; wraps x into [0,1).
inline double wrap_unit(double x) { return x - std::floor(x); }

}  // namespace gfront

#pragma once

#include <array>
#include <cmath>

namespace cforge {

/// Second-order forward jet in three variables: value, gradient and Hessian.
struct Jet {
    double v = 0.0;
    std::array<double, 3> g{};
    std::array<std::array<double, 3>, 3> h{};

    static Jet constant(double c) {
        Jet j;
        j.v = c;
        return j;
    }
    static Jet variable(double value, int axis) {
        Jet j;
        j.v = value;
        j.g[axis] = 1.0;
        return j;
    }
};

/// Apply a scalar function with first and second derivative f1, f2 at u.v.
inline Jet chain(const Jet& u, double f0, double f1, double f2) {
    Jet r;
    r.v = f0;
    for (int i = 0; i < 3; ++i) {
        r.g[i] = f1 * u.g[i];
        for (int j = 0; j < 3; ++j) r.h[i][j] = f1 * u.h[i][j] + f2 * u.g[i] * u.g[j];
    }
    return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v + b.v;
    for (int i = 0; i < 3; ++i) {
        r.g[i] = a.g[i] + b.g[i];
        for (int j = 0; j < 3; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
    }
    return r;
}

inline Jet operator-(const Jet& a) {
    Jet r;
    r.v = -a.v;
    for (int i = 0; i < 3; ++i) {
        r.g[i] = -a.g[i];
        for (int j = 0; j < 3; ++j) r.h[i][j] = -a.h[i][j];
    }
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    for (int i = 0; i < 3; ++i) {
        r.g[i] = a.v * b.g[i] + b.v * a.g[i];
        for (int j = 0; j < 3; ++j)
            r.h[i][j] = a.v * b.h[i][j] + b.v * a.h[i][j] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
    }
    return r;
}

inline Jet operator*(double c, const Jet& a) {
    Jet r;
    r.v = c * a.v;
    for (int i = 0; i < 3; ++i) {
        r.g[i] = c * a.g[i];
        for (int j = 0; j < 3; ++j) r.h[i][j] = c * a.h[i][j];
    }
    return r;
}

inline Jet reciprocal(const Jet& a) {
    const double inv = 1.0 / a.v;
    return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}
inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet tanh(const Jet& a) {
    const double t = std::tanh(a.v);
    const double s = 1.0 - t * t;
    return chain(a, t, s, -2.0 * t * s);
}
inline Jet abs(const Jet& a) { return a.v < 0.0 ? -a : a; }
inline Jet pow(const Jet& a, double p) {
    if (p == 0.0) return Jet::constant(1.0);
    const double f0 = std::pow(a.v, p);
    const double f1 = p * std::pow(a.v, p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.v, p - 2.0);
    return chain(a, f0, f1, f2);
}
inline Jet min(const Jet& a, const Jet& b) { return a.v <= b.v ? a : b; }
inline Jet max(const Jet& a, const Jet& b) { return a.v >= b.v ? a : b; }

}  // namespace cforge

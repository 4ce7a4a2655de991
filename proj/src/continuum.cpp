#include "cforge/continuum.hpp"

#include "cforge/errors.hpp"

namespace cforge {

namespace {

D1 operator+(const D1& a, const D1& b) {
    D1 r{a.v + b.v, {}};
    for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] + b.g[i];
    return r;
}
D1 operator-(const D1& a, const D1& b) {
    D1 r{a.v - b.v, {}};
    for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] - b.g[i];
    return r;
}
D1 operator*(const D1& a, const D1& b) {
    D1 r{a.v * b.v, {}};
    for (int i = 0; i < 3; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    return r;
}
D1 operator*(double c, const D1& a) {
    D1 r{c * a.v, {}};
    for (int i = 0; i < 3; ++i) r.g[i] = c * a.g[i];
    return r;
}
D1 operator/(const D1& a, const D1& b) {
    D1 r{a.v / b.v, {}};
    for (int i = 0; i < 3; ++i) r.g[i] = (a.g[i] * b.v - a.v * b.g[i]) / (b.v * b.v);
    return r;
}

D1 value(const Jet& j) { return {j.v, j.g}; }
/// ∂_axis of a jet, with its own gradient from the Hessian.
D1 partial(const Jet& j, int axis) {
    const auto a = static_cast<std::size_t>(axis);
    return {j.g[a], j.h[a]};
}

std::size_t ix(int i, int j) { return static_cast<std::size_t>(3 * i + j); }
std::size_t ix(int k, int i, int j) { return static_cast<std::size_t>(9 * k + 3 * i + j); }

}  // namespace

ContinuumMetric::ContinuumMetric(const MetricSpec& spec, int dim) : spec_(spec), d_(dim) {
    if (spec.kind == MetricGenerator::nodal)
        throw ConfigError("continuum metric: nodal metrics have no expression form");
    if (dim < 2 || dim > 3) throw ConfigError("continuum metric: dimension must be 2 or 3");
}

Frame ContinuumMetric::frame(const Vec3& x) const {
    Frame f;
    const int d = d_;
    f.d = d;
    std::array<Jet, 9> J;
    for (Jet& j : J) j = Jet::constant(0.0);
    switch (spec_.kind) {
        case MetricGenerator::flat:
            for (int i = 0; i < d; ++i) J[ix(i, i)] = Jet::constant(1.0);
            break;
        case MetricGenerator::conformally_flat: {
            const Jet c = pow(spec_.psi.jet(x), 4.0 / (spec_.conformal_n - 2));
            for (int i = 0; i < d; ++i) J[ix(i, i)] = c;
            break;
        }
        case MetricGenerator::custom: {
            static constexpr int pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
            for (int c = 0; c < 6; ++c) {
                const int i = pairs[c][0], j = pairs[c][1];
                if (i >= d || j >= d) continue;
                J[ix(i, j)] = J[ix(j, i)] = spec_.components[static_cast<std::size_t>(c)].jet(x);
            }
            break;
        }
        case MetricGenerator::nodal: break;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            f.g[ix(i, j)] = value(J[ix(i, j)]);
            for (int k = 0; k < d; ++k) f.dg[ix(k, i, j)] = partial(J[ix(i, j)], k);
        }

    auto G = [&](int i, int j) { return f.g[ix(i, j)]; };
    D1 det;
    if (d == 2) {
        det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
        f.ginv[ix(0, 0)] = G(1, 1) / det;
        f.ginv[ix(1, 1)] = G(0, 0) / det;
        f.ginv[ix(0, 1)] = f.ginv[ix(1, 0)] = D1{} - G(0, 1) / det;
    } else {
        det = G(0, 0) * (G(1, 1) * G(2, 2) - G(1, 2) * G(2, 1)) - G(0, 1) * (G(1, 0) * G(2, 2) - G(1, 2) * G(2, 0)) +
              G(0, 2) * (G(1, 0) * G(2, 1) - G(1, 1) * G(2, 0));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
                f.ginv[ix(i, j)] = (G(i1, j1) * G(i2, j2) - G(i1, j2) * G(i2, j1)) / det;
            }
    }
    if (!(det.v > 0.0)) throw MetricError("continuum metric is not positive definite", 0);
    f.sqrt_det = std::sqrt(det.v);

    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                D1 s;
                for (int l = 0; l < d; ++l)
                    s = s + f.ginv[ix(k, l)] * (f.dg[ix(i, l, j)] + f.dg[ix(j, i, l)] - f.dg[ix(l, i, j)]);
                f.gamma[ix(k, i, j)] = 0.5 * s;
            }
    return f;
}

double laplace_beltrami(const Frame& f, const Jet& u) {
    double s = 0.0;
    for (int a = 0; a < f.d; ++a)
        for (int b = 0; b < f.d; ++b) {
            double t = u.h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            for (int k = 0; k < f.d; ++k) t -= f.Gam(k, a, b).v * u.g[static_cast<std::size_t>(k)];
            s += f.Ginv(a, b) * t;
        }
    return s;
}

double scalar_curvature(const Frame& f) {
    const int d = f.d;
    double R = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double Rij = 0.0;
            for (int k = 0; k < d; ++k) {
                Rij += f.Gam(k, i, j).g[static_cast<std::size_t>(k)] - f.Gam(k, i, k).g[static_cast<std::size_t>(j)];
                for (int l = 0; l < d; ++l)
                    Rij += f.Gam(k, k, l).v * f.Gam(l, i, j).v - f.Gam(k, j, l).v * f.Gam(l, i, k).v;
            }
            R += f.Ginv(i, j) * Rij;
        }
    return R;
}

namespace {

/// £_conf X_ij with first derivatives.
std::array<D1, 9> killing_d1(const Frame& f, const std::array<Jet, 3>& X) {
    const int d = f.d;
    std::array<D1, 9> nab{};  // ∇_i X^k at [3i + k]
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            D1 s = partial(X[static_cast<std::size_t>(k)], i);
            for (int l = 0; l < d; ++l) s = s + f.Gam(k, i, l) * value(X[static_cast<std::size_t>(l)]);
            nab[ix(i, k)] = s;
        }
    D1 div;
    for (int k = 0; k < d; ++k) div = div + nab[ix(k, k)];
    std::array<D1, 9> L{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            D1 s = (-2.0 / d) * (div * f.g[ix(i, j)]);
            for (int k = 0; k < d; ++k) s = s + f.g[ix(j, k)] * nab[ix(i, k)] + f.g[ix(i, k)] * nab[ix(j, k)];
            L[ix(i, j)] = s;
        }
    return L;
}

}  // namespace

Mat3 conformal_killing(const Frame& f, const std::array<Jet, 3>& X) {
    const std::array<D1, 9> L = killing_d1(f, X);
    Mat3 m{};
    for (std::size_t e = 0; e < 9; ++e) m[e] = L[e].v;
    return m;
}

Vec3 conformal_killing_laplacian(const Frame& f, const std::array<Jet, 3>& X) {
    const int d = f.d;
    const std::array<D1, 9> L = killing_d1(f, X);
    Vec3 r{};
    for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) {
                double t = L[ix(i, j)].g[static_cast<std::size_t>(k)];
                for (int l = 0; l < d; ++l)
                    t -= f.Gam(l, k, i).v * L[ix(l, j)].v + f.Gam(l, k, j).v * L[ix(i, l)].v;
                s += f.Ginv(i, k) * t;
            }
        r[static_cast<std::size_t>(j)] = s;
    }
    return r;
}

}  // namespace cforge

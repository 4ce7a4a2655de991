#pragma once

#include <array>
#include <cmath>

namespace cforge {

using Vec3 = std::array<double, 3>;

/// Row-major 3x3 matrix; in dimension d only the leading d x d block is used.
using Mat3 = std::array<double, 9>;

inline double& at(Mat3& m, int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }
inline double at(const Mat3& m, int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }

inline Mat3 identity3(int d) {
    Mat3 m{};
    for (int i = 0; i < d; ++i) at(m, i, i) = 1.0;
    return m;
}

inline double det(const Mat3& m, int d) {
    if (d == 1) return m[0];
    if (d == 2) return at(m, 0, 0) * at(m, 1, 1) - at(m, 0, 1) * at(m, 1, 0);
    return at(m, 0, 0) * (at(m, 1, 1) * at(m, 2, 2) - at(m, 1, 2) * at(m, 2, 1)) -
           at(m, 0, 1) * (at(m, 1, 0) * at(m, 2, 2) - at(m, 1, 2) * at(m, 2, 0)) +
           at(m, 0, 2) * (at(m, 1, 0) * at(m, 2, 1) - at(m, 1, 1) * at(m, 2, 0));
}

/// Inverse of the leading d x d block via the adjugate.
inline Mat3 inverse(const Mat3& m, int d) {
    Mat3 r{};
    const double D = det(m, d);
    if (d == 1) {
        r[0] = 1.0 / D;
    } else if (d == 2) {
        at(r, 0, 0) = at(m, 1, 1) / D;
        at(r, 1, 1) = at(m, 0, 0) / D;
        at(r, 0, 1) = -at(m, 0, 1) / D;
        at(r, 1, 0) = -at(m, 1, 0) / D;
    } else {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
                const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
                at(r, i, j) = (at(m, i1, j1) * at(m, i2, j2) - at(m, i1, j2) * at(m, i2, j1)) / D;
            }
    }
    return r;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b, int d) {
    Mat3 r{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += at(a, i, k) * at(b, k, j);
            at(r, i, j) = s;
        }
    return r;
}

/// Eigenvalues of a symmetric d x d block by cyclic Jacobi rotations, ascending.
inline Vec3 symmetric_eigenvalues(Mat3 a, int d) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += at(a, i, j) * at(a, i, j);
        if (off < 1e-300) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
            }
    }
    Vec3 ev{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) ev[static_cast<std::size_t>(i)] = at(a, i, i);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (ev[static_cast<std::size_t>(j)] < ev[static_cast<std::size_t>(i)])
                std::swap(ev[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(j)]);
    return ev;
}

/// ⟨A, B⟩ with both indices raised by ginv: ginv^{ia} ginv^{jb} A_ij B_ab.
inline double contract_raised(const Mat3& A, const Mat3& B, const Mat3& ginv, int d) {
    const Mat3 ga = matmul(ginv, A, d);
    const Mat3 gb = matmul(ginv, B, d);
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += at(ga, i, j) * at(gb, j, i);
    return s;
}

/// ginv^{ij} A_ij.
inline double trace_raised(const Mat3& A, const Mat3& ginv, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += at(ginv, i, j) * at(A, i, j);
    return s;
}

}  // namespace cforge

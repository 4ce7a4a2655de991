#include "cforge/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

std::atomic<int> g_threads{1};

/// Runs body(begin, end) over [0, n) split into contiguous chunks. Each row is
/// computed by exactly one worker, so results do not depend on the split.
template <class F>
void parallel_rows(std::size_t n, F&& body) {
    const int t = g_threads.load();
    if (t <= 1 || n < 4096) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + static_cast<std::size_t>(t) - 1) / static_cast<std::size_t>(t);
    for (int w = 0; w < t; ++w) {
        const std::size_t b = static_cast<std::size_t>(w) * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }
int thread_count() { return g_threads.load(); }

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    m.ptr_.assign(rows + 1, 0);
    std::size_t i = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (i < t.size() && t[i].row == r) {
            const std::size_t c = t[i].col;
            double v = 0.0;
            while (i < t.size() && t[i].row == r && t[i].col == c) v += t[i++].value;
            if (v != 0.0) {
                m.col_.push_back(c);
                m.val_.push_back(v);
            }
        }
        m.ptr_[r + 1] = m.col_.size();
    }
    m.filled_rows_ = rows;
    return m;
}

void CsrMatrix::push_row(std::vector<std::pair<std::size_t, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < entries.size();) {
        const std::size_t c = entries[i].first;
        double v = 0.0;
        while (i < entries.size() && entries[i].first == c) v += entries[i++].second;
        if (v == 0.0) continue;
        col_.push_back(c);
        val_.push_back(v);
    }
    ++filled_rows_;
    ptr_[filled_rows_] = col_.size();
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    parallel_rows(rows_, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            double s = 0.0;
            for (std::size_t k = ptr_[r]; k < ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        }
    });
}

void CsrMatrix::multiply_add(std::span<const double> x, std::span<double> y) const {
    parallel_rows(rows_, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            double s = 0.0;
            for (std::size_t k = ptr_[r]; k < ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] += s;
        }
    });
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) d[r] = at(r, r);
    return d;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
    const auto b = col_.begin() + static_cast<long>(ptr_[r]);
    const auto e = col_.begin() + static_cast<long>(ptr_[r + 1]);
    const auto it = std::lower_bound(b, e, c);
    return (it != e && *it == c) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
}

double CsrMatrix::symmetry_defect() const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = ptr_[r]; k < ptr_[r + 1]; ++k)
            m = std::max(m, std::abs(val_[k] - (col_[k] < rows_ ? at(col_[k], r) : 0.0)));
    return m;
}

CsrMatrix CsrMatrix::plus_diagonal(std::span<const double> d) const {
    CsrMatrix m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::vector<std::pair<std::size_t, double>> row;
        bool seen = false;
        for (std::size_t k = ptr_[r]; k < ptr_[r + 1]; ++k) {
            double v = val_[k];
            if (col_[k] == r) {
                v += d[r];
                seen = true;
            }
            row.emplace_back(col_[k], v);
        }
        if (!seen) row.emplace_back(r, d[r]);
        m.push_row(std::move(row));
    }
    return m;
}

void CsrMatrix::write_triplets(std::ostream& os) const {
    char buf[96];
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = ptr_[r]; k < ptr_[r + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", r, col_[k], val_[k]);
            os << buf;
        }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

namespace {

LinearSolveResult conjugate_gradient(const CsrMatrix& A, std::span<const double> b,
                                     std::vector<double> x, double tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> dinv = A.diagonal();
    double dmax = 0.0;
    for (double& v : dinv) {
        dmax = std::max(dmax, std::abs(v));
        v = v != 0.0 ? 1.0 / v : 1.0;
    }
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double bnorm = norm2(b);
    LinearSolveResult res;
    res.report.method = "cg";
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.x = std::move(x);
        res.report.converged = true;
        return res;
    }
    double rel = norm2(r) / bnorm;
    std::vector<double> best = x;
    double best_rel = rel;
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    int it = 0;
    while (rel > tol && it < max_iter) {
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        const double pp = dot(p, p);
        // A search direction with (numerically) zero curvature while residual
        // remains means b has a component in the null space of A.
        if (!(pAp > 1e-13 * dmax * pp))
            throw SingularOperatorError("linear solve: operator is singular for this right-hand side "
                                        "(relative residual " + std::to_string(rel) + ")");
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        ++it;
        rel = norm2(r) / bnorm;
        if (rel < best_rel) {
            best_rel = rel;
            best = x;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.report.iterations = it;
    if (rel > tol) {
        throw SolverError("cg: no convergence in " + std::to_string(it) +
                              " iterations (relative residual " + std::to_string(best_rel) + ")",
                          std::move(best), best_rel);
    }
    res.report.relative_residual = rel;
    res.report.converged = true;
    res.x = std::move(x);
    return res;
}

LinearSolveResult bicgstab(const CsrMatrix& A, std::span<const double> b, std::vector<double> x,
                           double tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> dinv = A.diagonal();
    for (double& v : dinv) v = v != 0.0 ? 1.0 / v : 1.0;
    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
    A.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    r0 = r;
    const double bnorm = norm2(b);
    LinearSolveResult res;
    res.report.method = "bicgstab";
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.x = std::move(x);
        res.report.converged = true;
        return res;
    }
    double rel = norm2(r) / bnorm;
    std::vector<double> best = x;
    double best_rel = rel;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    int it = 0;
    while (rel > tol && it < max_iter) {
        const double rho_new = dot(r0, r);
        if (rho_new == 0.0 || omega == 0.0) {
            // Restart with the current residual as shadow vector.
            r0 = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            if (dot(r0, r) == 0.0) break;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (std::size_t i = 0; i < n; ++i) ph[i] = dinv[i] * p[i];
        A.multiply(ph, v);
        alpha = rho / dot(r0, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        for (std::size_t i = 0; i < n; ++i) sh[i] = dinv[i] * s[i];
        A.multiply(sh, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        ++it;
        rel = norm2(r) / bnorm;
        if (rel < best_rel) {
            best_rel = rel;
            best = x;
        }
    }
    res.report.iterations = it;
    if (rel > tol)
        throw SolverError("bicgstab: no convergence in " + std::to_string(it) +
                              " iterations (relative residual " + std::to_string(best_rel) + ")",
                          std::move(best), best_rel);
    res.report.relative_residual = rel;
    res.report.converged = true;
    res.x = std::move(x);
    return res;
}

}  // namespace

LinearSolveResult solve_linear(const CsrMatrix& A, std::span<const double> b,
                               std::span<const double> x0, const LinearSolveOptions& opt) {
    if (A.rows() != A.cols() || b.size() != A.rows())
        throw ConfigError("solve_linear: dimension mismatch");
    if (!x0.empty() && x0.size() != b.size()) throw ConfigError("solve_linear: bad initial guess");
    std::vector<double> x = x0.empty() ? std::vector<double>(b.size(), 0.0)
                                       : std::vector<double>(x0.begin(), x0.end());
    const int max_iter = opt.max_iter > 0
                             ? opt.max_iter
                             : std::max(50, static_cast<int>(20.0 * std::sqrt(double(b.size()))));
    const bool use_cg = opt.method == SolverMethod::cg ||
                        (opt.method == SolverMethod::automatic && opt.symmetric);
    return use_cg ? conjugate_gradient(A, b, std::move(x), opt.tol, max_iter)
                  : bicgstab(A, b, std::move(x), opt.tol, max_iter);
}

}  // namespace cforge

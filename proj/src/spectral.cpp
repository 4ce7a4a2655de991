#include "cforge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

/// r^T G⁻¹ r for a mass matrix with at most 3×3 diagonal blocks.
double inverse_mass_norm2(const CsrMatrix& G, const std::vector<double>& r) {
    const auto& ptr = G.row_ptr();
    const auto& col = G.col_index();
    const auto& val = G.values();
    double s = 0.0;
    std::size_t i = 0;
    while (i < G.rows()) {
        // Block size = span of columns in row i, which start at i.
        std::size_t b = 1;
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) b = std::max(b, col[k] - i + 1);
        Mat3 m{};
        for (std::size_t bi = 0; bi < b; ++bi)
            for (std::size_t k = ptr[i + bi]; k < ptr[i + bi + 1]; ++k)
                at(m, static_cast<int>(bi), static_cast<int>(col[k] - i)) = val[k];
        const Mat3 mi = inverse(m, static_cast<int>(b));
        for (std::size_t a = 0; a < b; ++a)
            for (std::size_t c = 0; c < b; ++c)
                s += r[i + a] * at(mi, static_cast<int>(a), static_cast<int>(c)) * r[i + c];
        i += b;
    }
    return s;
}

CsrMatrix add_scaled(const CsrMatrix& K, const CsrMatrix& G, double sigma) {
    std::vector<CsrMatrix::Triplet> t;
    t.reserve(K.nnz() + G.nnz());
    for (std::size_t r = 0; r < K.rows(); ++r)
        for (std::size_t k = K.row_ptr()[r]; k < K.row_ptr()[r + 1]; ++k)
            t.push_back({r, K.col_index()[k], K.values()[k]});
    if (sigma != 0.0)
        for (std::size_t r = 0; r < G.rows(); ++r)
            for (std::size_t k = G.row_ptr()[r]; k < G.row_ptr()[r + 1]; ++k)
                t.push_back({r, G.col_index()[k], sigma * G.values()[k]});
    return CsrMatrix::from_triplets(K.rows(), K.cols(), std::move(t));
}

constexpr std::size_t kBlock = 4;

/// Modified Gram-Schmidt in the G inner product, applied twice; drops
/// dependent vectors and returns how many remain (moved to the front).
std::size_t g_orthonormalize(const CsrMatrix& G, std::vector<std::vector<double>>& X) {
    const std::size_t n = G.rows();
    std::vector<double> Gx(n);
    std::size_t kept = 0;
    for (std::size_t j = 0; j < X.size(); ++j) {
        G.multiply(X[j], Gx);
        const double before = std::sqrt(std::max(0.0, dot(X[j], Gx)));
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < kept; ++k) {
                G.multiply(X[k], Gx);
                const double c = dot(X[j], Gx);
                for (std::size_t i = 0; i < n; ++i) X[j][i] -= c * X[k][i];
            }
        G.multiply(X[j], Gx);
        const double s = std::sqrt(std::max(0.0, dot(X[j], Gx)));
        if (!(s > 1e-10 * before) || s == 0.0) continue;
        for (double& v : X[j]) v /= s;
        if (j != kept) std::swap(X[j], X[kept]);
        ++kept;
    }
    X.resize(kept);
    return kept;
}

/// Cyclic Jacobi for a small symmetric matrix (row-major m×m); eigenvalues
/// ascending, eigenvectors in the columns of V.
void jacobi_eigen(std::vector<double> H, std::size_t m, std::vector<double>& theta, std::vector<double>& V) {
    V.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) V[i * m + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) (i == j ? diag : off) += H[i * m + j] * H[i * m + j];
        if (off <= 1e-32 * diag) break;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = H[p * m + q];
                if (apq == 0.0) continue;
                const double tau = (H[q * m + q] - H[p * m + p]) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (std::size_t k = 0; k < m; ++k) {
                    const double hkp = H[k * m + p], hkq = H[k * m + q];
                    H[k * m + p] = c * hkp - s * hkq;
                    H[k * m + q] = s * hkp + c * hkq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double hpk = H[p * m + k], hqk = H[q * m + k];
                    H[p * m + k] = c * hpk - s * hqk;
                    H[q * m + k] = s * hpk + c * hqk;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = V[k * m + p], vkq = V[k * m + q];
                    V[k * m + p] = c * vkp - s * vkq;
                    V[k * m + q] = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return H[a * m + a] < H[b * m + b]; });
    theta.resize(m);
    std::vector<double> W(m * m);
    for (std::size_t j = 0; j < m; ++j) {
        theta[j] = H[order[j] * m + order[j]];
        for (std::size_t k = 0; k < m; ++k) W[k * m + j] = V[k * m + order[j]];
    }
    V = std::move(W);
}

}  // namespace

SpectralEstimate smallest_eigenpair(const CsrMatrix& K, const CsrMatrix& G, double sigma,
                                    const EigenOptions& opt, const std::string& tag) {
    SpectralEstimate est;
    est.tag = tag;
    const std::size_t n = K.rows();
    if (n == 0) return est;

    const CsrMatrix A = add_scaled(K, G, sigma);
    // A block of vectors resolves clustered ground states (symmetric boxes
    // carry near-degenerate lowest modes that stall single-vector iteration).
    const std::size_t b = std::min<std::size_t>(n, kBlock);
    std::mt19937_64 rng(opt.seed);
    std::vector<std::vector<double>> X(b, std::vector<double>(n));
    for (std::size_t j = 0; j < b; ++j)
        for (double& v : X[j]) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            v = j == 0 ? 1.0 + 0.25 * u : u - 0.5;
        }
    LinearSolveOptions lo;
    lo.tol = opt.inner_tol;
    lo.max_iter = std::max(200, static_cast<int>(50.0 * std::sqrt(double(n))));
    std::vector<double> Gx(n), Kx(n), r(n);
    double lambda = 0.0;
    double rel = 1.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        // Inexact inner solves while far from convergence; Rayleigh-Ritz absorbs the error.
        lo.tol = std::clamp(1e-2 * rel * opt.tol, opt.inner_tol, 1e-4);
        for (std::size_t j = 0; j < b; ++j) {
            G.multiply(X[j], Gx);
            X[j] = solve_linear(A, Gx, X[j], lo).x;
        }
        const std::size_t m = g_orthonormalize(G, X);
        std::vector<double> H(m * m);
        std::vector<std::vector<double>> KX(m, std::vector<double>(n));
        for (std::size_t j = 0; j < m; ++j) K.multiply(X[j], KX[j]);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j <= i; ++j) H[i * m + j] = H[j * m + i] = dot(X[i], KX[j]);
        std::vector<double> theta, V;
        jacobi_eigen(H, m, theta, V);
        std::vector<std::vector<double>> Y(m, std::vector<double>(n, 0.0));
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                const double c = V[k * m + j];
                for (std::size_t i = 0; i < n; ++i) Y[j][i] += c * X[k][i];
            }
        X = std::move(Y);
        for (std::size_t j = m; j < b; ++j) {
            X.emplace_back(n);
            for (double& v : X.back()) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
        }

        lambda = theta[0];
        G.multiply(X[0], Gx);
        K.multiply(X[0], Kx);
        for (std::size_t i = 0; i < n; ++i) r[i] = Kx[i] - lambda * Gx[i];
        est.residual = std::sqrt(std::max(0.0, inverse_mass_norm2(G, r)));
        est.iterations = it;
        const double scale = std::max({std::abs(lambda), std::abs(lambda + sigma), 1e-300});
        rel = est.residual / (scale * opt.tol);
        if (est.residual <= opt.tol * scale) {
            est.lambda = lambda;
            est.vector = std::move(X[0]);
            return est;
        }
    }
    throw EigenError(tag + ": inverse iteration did not converge (residual " +
                     std::to_string(est.residual) + ", lambda " + std::to_string(lambda) + ")");
}

SpectralEstimate lambda1_conf(const MetricField& metric, const Domain& domain, const EigenOptions& opt) {
    if (!metric.chart().has_dirichlet())
        throw PreconditionError("lambda1_conf: needs Dirichlet data (periodic charts carry conformal Killing fields)");
    if (domain.dof_count() == 0) {
        SpectralEstimate e;
        e.tag = "conf";
        return e;
    }
    const DiscreteOperator op = assemble_conformal_killing_laplacian(metric, domain);
    return smallest_eigenpair(op.stiffness, mass_matrix(op), 0.0, opt, "conf");
}

SpectralEstimate lambda1_schrodinger(const MetricField& metric, const std::vector<double>& potential,
                                     const Domain& domain, const EigenOptions& opt) {
    if (potential.size() != metric.size()) throw ConfigError("lambda1_schrodinger: potential size mismatch");
    for (double v : potential)
        if (!std::isfinite(v)) throw ConfigError("lambda1_schrodinger: potential is not finite");
    if (domain.dof_count() == 0) {
        SpectralEstimate e;
        e.tag = "schrodinger";
        return e;
    }
    const DiscreteOperator op = assemble_laplace_beltrami(metric, domain);
    const std::vector<double> V = op.gather(potential);
    const CsrMatrix K = shifted_stiffness(op, V);
    double vmin = 0.0;
    for (double v : V) vmin = std::min(vmin, v);
    // Shift so that the inner systems are positive definite.
    const double sigma = -vmin + (domain.has_fixed_neighbors() ? 0.0 : 1.0);
    SpectralEstimate e = smallest_eigenpair(K, mass_matrix(op), sigma, opt, "schrodinger");
    return e;
}

std::vector<std::uint8_t> zero_set_mask(const std::vector<double>& tau, double tol) {
    std::vector<std::uint8_t> m(tau.size(), 0);
    for (std::size_t p = 0; p < tau.size(); ++p) m[p] = std::abs(tau[p]) < tol ? 1 : 0;
    return m;
}

}  // namespace cforge

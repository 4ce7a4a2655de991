#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cforge/operators.hpp"

namespace cforge {

struct SpectralEstimate {
    /// +∞ when the domain has no unknowns.
    double lambda = std::numeric_limits<double>::infinity();
    /// ‖A v − λ G v‖_{G⁻¹} / ‖v‖_G.
    double residual = 0.0;
    int iterations = 0;
    std::string tag;
    /// Normalized eigenvector on the dofs (‖v‖_G = 1).
    std::vector<double> vector;
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iter = 2000;
    double inner_tol = 1e-13;
    /// Seed of the random start vector.
    std::uint64_t seed = 0x5eed;
};

/// Smallest eigenvalue μ of the pencil K v = μ G v by block inverse iteration
/// on K + σG with Rayleigh-Ritz. Used by the two estimators below; exposed for testing.
SpectralEstimate smallest_eigenpair(const CsrMatrix& K, const CsrMatrix& G, double sigma,
                                    const EigenOptions& opt, const std::string& tag);

/// Smallest eigenvalue of −Δ_conf with zero Dirichlet data on the domain, the
/// infimum of −⟨X, Δ_conf X⟩ / ‖X‖² over fields vanishing off the domain.
SpectralEstimate lambda1_conf(const MetricField& metric, const Domain& domain,
                              const EigenOptions& opt = {});

/// Smallest eigenvalue of −Δ + V with zero Dirichlet data; V is a node field.
SpectralEstimate lambda1_schrodinger(const MetricField& metric, const std::vector<double>& potential,
                                     const Domain& domain, const EigenOptions& opt = {});

/// Nodes with |τ| below the tolerance.
std::vector<std::uint8_t> zero_set_mask(const std::vector<double>& tau, double tol = 1e-10);

}  // namespace cforge

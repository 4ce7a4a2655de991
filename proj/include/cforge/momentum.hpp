#pragma once

#include <optional>
#include <vector>

#include "cforge/conformal_data.hpp"
#include "cforge/operators.hpp"

namespace cforge {

struct MomentumSolution {
    std::vector<Vec3> X;
    /// Nodal £_conf X.
    std::vector<Mat3> LX;
    double norm_X = 0.0;
    double norm_LX = 0.0;
    double norm_rhs = 0.0;
    /// Mass-weighted ‖Δ_conf X − RHS‖ relative to ‖RHS‖.
    double residual = 0.0;
    /// λ₁ used for the a posteriori bound (NaN when not supplied).
    double lambda1 = 0.0;
    /// ‖X‖ ≤ ‖RHS‖/λ₁·(1 + 10⁻⁶); only meaningful with zero boundary data.
    bool bound_holds = true;
    bool bound_checked = false;
    LinearSolveReport report;
};

/// RHS = r_n ∇τ φ^{2n/(n−2)} + ω₁ φ^{2(n+1)/(n−2)} − ω₂ at every node.
std::vector<Vec3> momentum_rhs(const std::vector<double>& phi, const ConformalData& data,
                               const ConformalConstants& k, int dim);

struct MomentumOptions {
    LinearSolveOptions linear{1e-10, 0, SolverMethod::cg, true};
    /// Smallest CKL eigenvalue of the domain; ≤ 0 raises SpectralError.
    std::optional<double> lambda1;
};

/// Solves Δ_conf X = RHS on the operator's domain with X = bc off the domain.
MomentumSolution solve_momentum(const DiscreteOperator& ckl, const MetricField& metric,
                                const std::vector<Vec3>& rhs, const std::vector<Vec3>& bc,
                                const MomentumOptions& opt = {},
                                const std::vector<Vec3>* warm = nullptr);

/// ‖X‖² = Σ m_p γ_ij X^i X^j over the operator's dofs.
double vector_l2(const DiscreteOperator& ckl, const MetricField& metric, const std::vector<Vec3>& X);
/// ‖ω‖² = Σ m_p γ^{ij} ω_i ω_j over the operator's dofs.
double covector_l2(const DiscreteOperator& ckl, const MetricField& metric, const std::vector<Vec3>& w);

}  // namespace cforge

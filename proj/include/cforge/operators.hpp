#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "cforge/geometry.hpp"
#include "cforge/sparse.hpp"

namespace cforge {

enum class BlockKind { scalar, vector };

/// A discrete elliptic operator on the unknown nodes of a Domain.
///
/// The operator is stored as the symmetric stiffness K of its quadratic form,
/// split into the dof block and the coupling to fixed nodes, so that
///   (Δ_h u)_p = −(K u_dof + C u_fixed)_p / m_p,   m_p = h^d √γ_p.
/// Unknowns are interleaved: row = dof·block + component.
struct DiscreteOperator {
    Domain domain;
    BlockKind kind = BlockKind::scalar;
    int block = 1;
    bool symmetric = true;
    BoundaryKind boundary = BoundaryKind::dirichlet;
    CsrMatrix stiffness;
    /// Columns index every grid node (node·block + component); only fixed nodes appear.
    CsrMatrix coupling;
    /// m_p per dof.
    std::vector<double> mass;
    /// γ_p per dof (vector operators only), the metric part of the mass blocks.
    std::vector<Mat3> gamma;

    std::size_t unknowns() const { return stiffness.rows(); }

    /// Restriction of a node field (stride = block) to the dofs.
    std::vector<double> gather(std::span<const double> full) const;
    /// Writes dof values into a node field, leaving fixed nodes untouched.
    void scatter(std::span<const double> dof, std::span<double> full) const;
    /// Δ_h u on the dofs for a node field u that also carries the boundary values.
    std::vector<double> apply(std::span<const double> full) const;
    /// −C u_fixed, the right-hand side contribution of the fixed nodes.
    std::vector<double> boundary_load(std::span<const double> full) const;
    /// Writes the stiffness as "row col value" lines.
    void dump(std::ostream& os) const { stiffness.write_triplets(os); }
};

/// Flux-form Laplace–Beltrami operator (1/√γ)∂_a(√γ γ^{ab} ∂_b u).
DiscreteOperator assemble_laplace_beltrami(const MetricField& metric, const Domain& domain);

/// Conformal Killing Laplacian div_γ(£_conf X) acting on vector fields X and
/// returning covectors. Trace removal uses the chart dimension.
DiscreteOperator assemble_conformal_killing_laplacian(const MetricField& metric,
                                                      const Domain& domain);

/// Discrete ‖£X‖² in the quadrature of the assembled CKL (values off the grid count as 0).
double conformal_energy(const MetricField& metric, const std::vector<Vec3>& X);

/// Nodal £_conf X with lower indices, by second-order differences.
std::vector<Mat3> conformal_killing_operator(const MetricField& metric, const std::vector<Vec3>& X);

/// Nodal div_γ X = (1/√γ)∂_k(√γ X^k).
std::vector<double> divergence(const MetricField& metric, const std::vector<Vec3>& X);

/// Interleaved copy of the first d components of a vector field and back.
std::vector<double> flatten(const std::vector<Vec3>& v, int d);
std::vector<Vec3> unflatten(std::span<const double> v, int d);

/// Solves (Δ_h − a)u = f on the dofs with u = bc at fixed nodes. `a` and `f`
/// are per dof (a may be empty); the result is a node field that equals bc off
/// the domain. For vector operators `f` is a covector and `a` multiplies the
/// metric mass γ_p.
std::vector<double> solve_dirichlet(const DiscreteOperator& op, std::span<const double> a,
                                    std::span<const double> f, std::span<const double> bc,
                                    const LinearSolveOptions& opt = {},
                                    std::span<const double> warm = {},
                                    LinearSolveReport* report = nullptr);

/// Block-diagonal mass G = m_p γ_p (m_p alone for scalars), scaled per dof by `a` when given.
CsrMatrix mass_matrix(const DiscreteOperator& op, std::span<const double> a = {});

/// K + G(a), the stiffness of −(Δ_h − a).
CsrMatrix shifted_stiffness(const DiscreteOperator& op, std::span<const double> a);

}  // namespace cforge

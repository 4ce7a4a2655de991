#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cforge/expression.hpp"
#include "cforge/geometry.hpp"
#include "cforge/rational.hpp"

namespace cforge {

/// Dimensional constants of the conformal method in dimension n ≥ 3.
struct ConformalConstants {
    int n = 3;

    static ConformalConstants make(int n);

    Rational a_n() const { return {4 * (n - 1), n - 2}; }
    /// c_n = 1/a_n: the Lichnerowicz equation divided by the coefficient of Δφ.
    Rational c_n() const { return {n - 2, 4 * (n - 1)}; }
    /// r_n = (n−1)/n, the τ² coefficient of the Hamiltonian constraint.
    Rational r_n() const { return {n - 1, n}; }
    /// b_n = c_n·r_n, coefficient of τ²φ^N.
    Rational b_n() const { return c_n() * r_n(); }

    /// Critical exponent N = (n+2)/(n−2).
    Rational critical() const { return {n + 2, n - 2}; }
    Rational k_power() const { return {-(3 * n - 2), n - 2}; }
    Rational eps2_power() const { return {-3}; }
    Rational eps3_power() const { return {n - 6, n - 2}; }
    /// φ power multiplying dτ in the momentum equation, 2n/(n−2).
    Rational tau_power() const { return {2 * n, n - 2}; }
    /// φ power multiplying ω₁, 2(n+1)/(n−2).
    Rational omega1_power() const { return {2 * (n + 1), n - 2}; }
    /// φ power of the physical metric, 4/(n−2).
    Rational metric_power() const { return {4, n - 2}; }
};

/// Electromagnetic pack: F̃ (antisymmetric), q̃ and the covector V.
struct EmPack {
    std::vector<Mat3> F;
    std::vector<double> q;
    std::vector<Vec3> V;
};

/// Free data of the conformal system on a chart. All fields are nodal and
/// cover every node; covectors and tensors carry lower indices.
struct ConformalData {
    std::vector<double> tau;
    std::vector<Vec3> dtau;
    std::vector<Mat3> U;
    std::vector<double> eps1, eps2, eps3;
    std::vector<Vec3> omega1, omega2;
    std::optional<EmPack> em;

    /// Dirichlet values for φ, X and f (bc_u may be empty: caller chooses).
    std::vector<double> bc_u;
    std::vector<Vec3> bc_v;
    std::vector<double> bc_w;

    double trace_residual = 0.0;
    double div_residual = 0.0;
    bool non_tt = false;

    /// Manufactured-solution forcings added to the φ, X and f equations (empty when unused).
    std::vector<double> force_phi;
    std::vector<Vec3> force_X;
    std::vector<double> force_f;
};

/// Expressions for each field of ConformalData; U uses (xx, xy, xz, yy, yz, zz),
/// F uses (xy, xz, yz).
struct DataSpec {
    Expression tau = Expression::constant(0.0);
    std::array<Expression, 6> U{};
    Expression eps1, eps2, eps3;
    std::array<Expression, 3> omega1{}, omega2{};
    bool has_em = false;
    std::array<Expression, 3> F{};
    Expression q;
    std::array<Expression, 3> V{};
    std::optional<Expression> bc_u;
    std::array<Expression, 3> bc_v{};
    Expression bc_w;
    double tt_tol = 1e-8;
    double trace_cap = 1.0;
};

ConformalData assemble_data(const MetricField& metric, const DataSpec& spec);

/// Charged-fluid inputs; u is a vector, V a covector, F antisymmetric.
struct FluidInputs {
    std::vector<double> mu;
    std::vector<Vec3> u;
    std::vector<double> q;
    std::vector<double> f;
    std::vector<Vec3> V;
    std::vector<Mat3> F;
};

struct FluidSources {
    std::vector<double> eps1, eps2, eps3, q_tilde;
    std::vector<Vec3> omega1, omega2;
};

FluidSources sources_from_fluid(const FluidInputs& in, const MetricField& metric);

/// ε₂ = ½|E|² and ω₂_k = F_ik E^i for a covector E at every node.
void em_sources(const MetricField& metric, const std::vector<Mat3>& F, const std::vector<Vec3>& E,
                std::vector<double>& eps2, std::vector<Vec3>& omega2);

/// Removes the γ-trace: U − (1/d)(tr_γ U) γ.
std::vector<Mat3> tt_project(const std::vector<Mat3>& U, const MetricField& metric);

/// max over nodes of |tr_γ U|.
double trace_residual(const std::vector<Mat3>& U, const MetricField& metric);

/// max over nodes of |div_γ U|_γ.
double divergence_residual(const std::vector<Mat3>& U, const MetricField& metric);

/// Centered-difference gradient of a scalar field (covector).
std::vector<Vec3> gradient(const GridChart& chart, const std::vector<double>& u);

}  // namespace cforge

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cforge/conformal_data.hpp"
#include "cforge/lichnerowicz.hpp"
#include "cforge/spectral.hpp"

namespace cforge {

enum class BarrierRoute { linear_nonvacuum, yamabe };
enum class CertifyMode { none, worst_case, posteriori };

struct Certificate {
    /// max H(φ₊) over the dofs (≤ 0 for a supersolution).
    double super_margin = 0.0;
    /// min H(φ₋) over the dofs (≥ 0 for a subsolution).
    double sub_margin = 0.0;
    /// Largest |K̃|² used in the evaluation.
    double k2_bound = 0.0;
    /// Worst-case constant of the momentum estimate (0 in posteriori mode).
    double m_bound = 0.0;
    BarrierRoute route = BarrierRoute::linear_nonvacuum;
    CertifyMode mode = CertifyMode::none;
    bool certified = false;
};

struct BarrierPair {
    std::vector<double> lower, upper;
    double l = 0.0, m = 0.0;
    Certificate cert;
    /// Auxiliary linear solutions (v for φ₊ = 1 + v, u for φ₋ = αu) and parameters.
    std::vector<double> v, u;
    double alpha = 0.0;
    double c_plus = 0.0, c_minus = 0.0;
};

/// Everything the barrier builders need besides the data.
struct BarrierContext {
    const MetricField* metric = nullptr;
    const CurvaturePack* curvature = nullptr;
    const DiscreteOperator* laplacian = nullptr;  ///< on the outermost domain
    ConformalConstants constants;
    LinearSolveOptions linear{1e-12, 0, SolverMethod::cg, true};
};

/// a = c_n R + b_n τ² at every node.
std::vector<double> supersolution_coefficient(const BarrierContext& ctx, const ConformalData& data);

/// φ₊ = 1 + v with (Δ − a)v = −a and v = c₊ off the domain. Throws
/// HypothesisError when a ≤ 0 somewhere.
std::vector<double> build_supersolution(const BarrierContext& ctx, const ConformalData& data,
                                        double c_plus = 0.0, std::vector<double>* v_out = nullptr);

/// Λ₋ = ½(ε₂+ε₃) for n ≤ 6, ½ε₂ otherwise.
std::vector<double> subsolution_source(const ConformalConstants& k, const ConformalData& data);

struct SubsolutionResult {
    std::vector<double> phi;
    std::vector<double> u;
    double alpha = 0.0;
    double c_minus = 0.0;
};

/// φ₋ = αu with (Δ − a)u = −Λ₋ and u = c₋ off the domain; c₋ < 0 selects
/// min Λ₋/a. Throws VacuumError when Λ₋ vanishes somewhere.
SubsolutionResult build_subsolution_nonvacuum(const BarrierContext& ctx, const ConformalData& data,
                                              double c_minus = -1.0);

enum class YamabeChoice { R_tau, eps3_tau };

struct YamabeOptions {
    YamabeChoice choice = YamabeChoice::R_tau;
    /// Dirichlet value of the auxiliary solution.
    double u0 = 0.0;
    double tau_zero_tol = 1e-10;
    PicardOptions picard{};
    EigenOptions eigen{};
};

struct YamabeResult {
    std::vector<double> phi;
    std::vector<double> u;
    double kappa = 0.0;
    double u_lo_scale = 0.0;  ///< δ of the ground-state lower barrier (0 when u_lo = 0)
    double u_hi = 0.0;
    double lambda_b0 = 0.0, lambda_m = 0.0;
    PicardTrace trace;
};

/// Positive solution of the auxiliary Yamabe-type equation between constant
/// barriers, without spectral checks.
YamabeResult solve_yamabe_auxiliary(const BarrierContext& ctx, const ConformalData& data,
                                    const YamabeOptions& opt);

/// Checks λ₁(B₀) > 0 and λ₁(M) < 0 for the auxiliary operator, then solves
/// it and scales by κ = 0.99·min(1, 1/sup u).
YamabeResult build_subsolution_yamabe(const BarrierContext& ctx, const ConformalData& data,
                                      const YamabeOptions& opt);

/// L² and L^p norms of the pointwise γ-norm of a covector field (weights h^d √γ).
struct NormPair {
    double l2 = 0.0, lp = 0.0;
    double max() const { return l2 > lp ? l2 : lp; }
};
NormPair covector_norms(const MetricField& metric, const std::vector<Vec3>& w, double p);

struct CertifyOptions {
    CertifyMode mode = CertifyMode::worst_case;
    double c_cert = 1.0;
    /// L^p exponent; 0 selects 2n.
    double p = 0.0;
    double tol = 1e-6;
};

/// Evaluates H(φ±) with the worst-case |K̃|² bound or the actual £X + U.
/// `X` is required in posteriori mode.
Certificate certify_barriers(const BarrierPair& pair, const BarrierContext& ctx, const ConformalData& data,
                             double lambda1_conf, const CertifyOptions& opt,
                             const std::vector<Vec3>* X = nullptr);

/// H(φ) = Δ_h φ − h(φ) on the dofs for a given |K̃|² field.
std::vector<double> lichnerowicz_operator(const BarrierContext& ctx, const ConformalData& data,
                                          const std::vector<double>& k2, const std::vector<double>& phi);

/// |£X + U|²_γ at every node.
std::vector<double> k_tilde_squared(const MetricField& metric, const std::vector<Mat3>& LX,
                                    const std::vector<Mat3>& U);

struct HypothesisReport {
    double a0 = 0.0;
    double lambda1_conf = 0.0;
    bool eps_positive = false;
    std::vector<double> smallness_lhs;
    double min_C = 0.0;
    std::vector<std::size_t> tau_zero_nodes;
    /// H² of Ric ≥ −(n−1)H²(1+r²), A of R ≥ −A, B of |τ| ≥ B off the compact.
    double ricci_H2 = 0.0;
    double curvature_A = 0.0;
    double tau_B = 0.0;
    double lambda_b0 = 0.0;
    double lambda_m = 0.0;
    bool yamabe_ok = false;
};

struct HypothesisOptions {
    double p = 0.0;
    double tau_zero_tol = 1e-10;
    /// Closed compact set (node mask) outside of which |τ| ≥ B is tested; empty = whole chart.
    std::vector<std::uint8_t> compact;
    std::optional<double> lambda1_conf;
    bool spectral = true;
    EigenOptions eigen{};
};

HypothesisReport check_hypotheses(const BarrierContext& ctx, const ConformalData& data,
                                  const HypothesisOptions& opt = {});

struct SweepRow {
    double tau0 = 0.0;
    double min_C = 0.0;
    bool pass = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Smallest passing τ₀ in the table (NaN when none passes).
    double threshold = 0.0;
    bool monotone = true;
};

/// τ = τ₀ + τ̃ with τ̃ = data.tau; min C(τ₀) = max LHS'/τ₀² with LHS' including τ̃².
SweepResult sweep_tau0(const BarrierContext& ctx, const ConformalData& data, double lo, double hi, int steps,
                       double c_target, double p = 0.0);

}  // namespace cforge

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cforge/barriers.hpp"
#include "cforge/lichnerowicz.hpp"
#include "cforge/momentum.hpp"

namespace cforge {

enum class SessionMode { compact, exhaustion, em };

struct OuterRecord {
    double phi_diff = 0.0;
    double X_diff = 0.0;
    double f_diff = 0.0;
    /// phi_diff + X_diff (+ f_diff).
    double residual = 0.0;
    /// Discrete H² norm of the φ update on the level dofs.
    double h2_diff = 0.0;
    int picard_iterations = 0;
    double momentum_residual = 0.0;
    /// Surrogate for ‖X‖_{W^{2,p}}: ‖X‖ + ‖£X‖ of the momentum solve.
    double X_norm = 0.0;
};

struct LevelRecord {
    int level = 1;
    std::vector<double> phi;
    std::vector<Vec3> X;
    std::vector<double> f;
    std::vector<OuterRecord> outer;
    /// Picard traces of every outer iterate.
    std::vector<PicardTrace> picard;
    LinearSolveReport momentum_report;
    /// Largest ratio r_{j+1}/r_j over the recorded tail (0 when undefined).
    double rho = 0.0;
    bool converged = false;
    /// The momentum surrogate norm grew over the last outer iterates.
    bool X_growth = false;
};

struct SolveSession {
    SessionMode mode = SessionMode::compact;
    std::vector<LevelRecord> levels;
    /// d_k = ‖φ^{(k+1)} − φ^{(k)}‖_{∞,Ω₁}.
    std::vector<double> cauchy;
    double lambda1_conf = 0.0;

    const LevelRecord& last() const { return levels.back(); }
};

/// Outer loop ran out of iterations; carries the session so far.
class CoupledError : public NonConvergenceError {
public:
    CoupledError(const std::string& what, SolveSession s) : NonConvergenceError(what), session_(std::move(s)) {}
    const SolveSession& session() const noexcept { return session_; }

private:
    SolveSession session_;
};

struct CoupledOptions {
    double tol = 1e-8;
    int max_outer = 100;
    PicardOptions picard{};
    LinearSolveOptions momentum_linear{1e-12, 0, SolverMethod::cg, true};
    /// Precomputed λ₁ of the conformal Killing Laplacian on the chart.
    std::optional<double> lambda1_conf;
    EigenOptions eigen{};
    /// Ratios r_{j+1}/r_j from this outer iterate on enter ρ.
    int rho_from = 3;
};

struct CoupledContext {
    const MetricField* metric = nullptr;
    const CurvaturePack* curvature = nullptr;
    ConformalConstants constants;
};

/// Adds ½|Ẽ|² to ε₂ and F̃_ik Ẽ^i to ω₂ for Ẽ = ∇f + V.
ConformalData with_em_sources(const ConformalData& data, const MetricField& metric, const std::vector<double>& f);

/// Alternates X ← momentum(φ), φ ← Picard(|K̃(X)|²) on the full Dirichlet chart, from φ₀ = φ₋.
SolveSession solve_coupled_compact(const CoupledContext& ctx, const ConformalData& data, const BarrierPair& barriers,
                                   const CoupledOptions& opt = {});

/// Triangular order f ← Δf = q̃φ^{2n/(n−2)}, X ← momentum(φ, f), φ ← Picard.
SolveSession solve_coupled_em(const CoupledContext& ctx, const ConformalData& data, const BarrierPair& barriers,
                              const CoupledOptions& opt = {});

/// Level k solves the Lichnerowicz equation on Ω_k with φ = (φ₊+φ₋)/2 off Ω_k
/// and the momentum equation on the whole chart.
SolveSession solve_coupled_exhaustion(const CoupledContext& ctx, const Exhaustion& exhaustion,
                                      const ConformalData& data, const BarrierPair& barriers,
                                      const CoupledOptions& opt = {});

}  // namespace cforge

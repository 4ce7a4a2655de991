#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cforge/conformal_data.hpp"
#include "cforge/errors.hpp"
#include "cforge/operators.hpp"
#include "cforge/rational.hpp"

namespace cforge {

/// One term sign·coef(x)·φ^power of the nonlinearity h, where Δφ = h(φ).
struct PowerTerm {
    std::string name;
    double sign = 1.0;
    std::vector<double> coef;
    Rational power{1};
};

/// Δφ = h(φ) on a domain with φ = boundary off the domain.
///
/// For the Lichnerowicz equation
///   h(φ) = A_R φ + A_τ φ^N − A_K φ^{−(3n−2)/(n−2)} − A_ε1 φ^N − A_ε2 φ^{−3} − A_ε3 φ^{(n−6)/(n−2)} + S
/// with N = (n+2)/(n−2) and S an optional forcing.
struct LichnerowiczProblem {
    std::vector<PowerTerm> terms;
    std::vector<double> forcing;
    /// Node field whose values at fixed nodes are the Dirichlet data.
    std::vector<double> boundary;
    double l = 0.0;
    double m = 0.0;

    const PowerTerm* term(const std::string& name) const;
    /// h at one node.
    double h(std::size_t node, double phi) const;
    /// ∂h/∂φ at one node.
    double dh(std::size_t node, double phi) const;
    std::size_t size() const { return boundary.size(); }
};

/// Assembles the Lichnerowicz coefficients from curvature, |K̃|² and the data.
/// `k2` is the node field |K̃|²_γ; `scalar_curvature` is R_γ.
LichnerowiczProblem make_lichnerowicz(const ConformalConstants& k, const std::vector<double>& scalar_curvature,
                                      const std::vector<double>& k2, const ConformalData& data,
                                      std::vector<double> boundary, double l, double m);

/// a(x) = 1.1 Σ |coef||power| max(l^{power−1}, m^{power−1}), floored at 10⁻⁸.
std::vector<double> shift_coefficient(const LichnerowiczProblem& problem, double floor = 1e-8);

/// Same bound taken nodewise over [lo(x), hi(x)].
std::vector<double> shift_coefficient(const LichnerowiczProblem& problem, const std::vector<double>& lo,
                                      const std::vector<double>& hi, double floor = 1e-8);

struct PicardTrace {
    std::vector<double> sup_diff;
    /// max(0, l − min φ_k, max φ_k − m).
    std::vector<double> bracket_violation;
    /// Largest nodewise excursion outside [φ₋, φ₊].
    std::vector<double> barrier_violation;
    /// Smallest nodewise increment φ_{k+1} − φ_k.
    std::vector<double> min_increment;
    /// max(φ̄_k − φ_k) of the two-sided iteration (empty otherwise).
    std::vector<double> bracket_gap;
    int iterations = 0;
    /// Last ratio of consecutive sup-differences.
    double contraction = 0.0;
    /// ‖Δ_h φ − h(φ)‖_∞ at the returned iterate.
    double equation_residual = 0.0;
    bool converged = false;

    void write_csv(std::ostream& os) const;
};

enum class PicardStart { lower, midpoint, given };

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 500;
    double linear_tol = 1e-12;
    PicardStart start = PicardStart::lower;
    /// ε_mp = mp_slack·m.
    double mp_slack = 1e-8;
    /// Damped Newton instead of the monotone iteration.
    bool newton = false;
    bool check_bracket = true;
};

struct PicardResult {
    std::vector<double> phi;
    PicardTrace trace;
};

/// max_iter exhausted; carries the last iterate and the trace.
class PicardError : public NonConvergenceError {
public:
    PicardError(const std::string& what, PicardResult partial)
        : NonConvergenceError(what), partial_(std::move(partial)) {}
    const PicardResult& partial() const noexcept { return partial_; }

private:
    PicardResult partial_;
};

/// Monotone iteration (Δ − a)φ_{k+1} = h(φ_k) − aφ_k between φ₋ and φ₊.
/// Started from φ₋ it runs a companion sequence down from φ₊ and takes the
/// nodewise shift over the current bracket.
/// Throws PreconditionError on bad barriers, BracketingError when an iterate
/// leaves [φ₋ − ε_mp, φ₊ + ε_mp] and PicardError when max_iter is exhausted.
PicardResult picard_solve(const LichnerowiczProblem& problem, const DiscreteOperator& lap,
                          const std::vector<double>& lower, const std::vector<double>& upper,
                          const PicardOptions& opt = {}, const std::vector<double>* start = nullptr);

/// Δ_h φ − h(φ) on the dofs.
std::vector<double> lichnerowicz_residual(const LichnerowiczProblem& problem, const DiscreteOperator& lap,
                                          const std::vector<double>& phi);

/// Largest constant l with h(l) ≤ 0 and smallest constant m ≥ l with h(m) ≥ 0
/// at every node, by bisection on [lo, hi]. Empty when none exists.
std::optional<std::pair<double, double>> constant_barriers(const LichnerowiczProblem& problem,
                                                           double lo = 1e-8, double hi = 1e8);

}  // namespace cforge

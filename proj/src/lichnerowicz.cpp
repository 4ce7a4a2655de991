#include "cforge/lichnerowicz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cforge {

namespace {

/// φ^p with p = 0 returning 1 even for φ = 0.
double power(double phi, double p) { return p == 0.0 ? 1.0 : std::pow(phi, p); }

}  // namespace

const PowerTerm* LichnerowiczProblem::term(const std::string& name) const {
    for (const PowerTerm& t : terms)
        if (t.name == name) return &t;
    return nullptr;
}

double LichnerowiczProblem::h(std::size_t node, double phi) const {
    double s = forcing.empty() ? 0.0 : forcing[node];
    for (const PowerTerm& t : terms) {
        const double c = t.coef[node];
        if (c != 0.0) s += t.sign * c * power(phi, t.power.to_double());
    }
    return s;
}

double LichnerowiczProblem::dh(std::size_t node, double phi) const {
    double s = 0.0;
    for (const PowerTerm& t : terms) {
        const double c = t.coef[node];
        const double p = t.power.to_double();
        if (c != 0.0 && p != 0.0) s += t.sign * c * p * power(phi, p - 1.0);
    }
    return s;
}

LichnerowiczProblem make_lichnerowicz(const ConformalConstants& k, const std::vector<double>& scalar_curvature,
                                      const std::vector<double>& k2, const ConformalData& data,
                                      std::vector<double> boundary, double l, double m) {
    const std::size_t n = data.tau.size();
    const double c_n = k.c_n().to_double();
    const double b_n = k.b_n().to_double();
    auto field = [n](auto&& f) {
        std::vector<double> v(n);
        for (std::size_t p = 0; p < n; ++p) v[p] = f(p);
        return v;
    };
    LichnerowiczProblem P;
    P.terms.push_back({"R", 1.0, field([&](std::size_t p) { return c_n * scalar_curvature[p]; }), Rational{1}});
    P.terms.push_back({"tau", 1.0, field([&](std::size_t p) { return b_n * data.tau[p] * data.tau[p]; }),
                       k.critical()});
    P.terms.push_back({"K", -1.0, field([&](std::size_t p) { return c_n * k2[p]; }), k.k_power()});
    P.terms.push_back({"eps1", -1.0, field([&](std::size_t p) { return 2.0 * c_n * data.eps1[p]; }), k.critical()});
    P.terms.push_back({"eps2", -1.0, field([&](std::size_t p) { return 2.0 * c_n * data.eps2[p]; }), k.eps2_power()});
    P.terms.push_back({"eps3", -1.0, field([&](std::size_t p) { return 2.0 * c_n * data.eps3[p]; }), k.eps3_power()});
    for (const PowerTerm& t : P.terms)
        if (t.name != "R")
            for (std::size_t p = 0; p < n; ++p)
                if (!(t.coef[p] >= 0.0))
                    throw DataError("Lichnerowicz coefficient " + t.name + " is negative at node " + std::to_string(p));
    if (!data.force_phi.empty()) P.forcing = data.force_phi;
    P.boundary = std::move(boundary);
    P.l = l;
    P.m = m;
    return P;
}

namespace {

double shift_at(const LichnerowiczProblem& problem, std::size_t p, double lo, double hi, double floor) {
    double s = 0.0;
    for (const PowerTerm& t : problem.terms) {
        const double pw = t.power.to_double();
        const double c = t.coef[p];
        if (c == 0.0 || pw == 0.0) continue;
        s += std::abs(c) * std::abs(pw) * std::max(power(lo, pw - 1.0), power(hi, pw - 1.0));
    }
    return std::max(1.1 * s, floor);
}

}  // namespace

std::vector<double> shift_coefficient(const LichnerowiczProblem& problem, double floor) {
    std::vector<double> a(problem.size(), 0.0);
    for (std::size_t p = 0; p < a.size(); ++p) a[p] = shift_at(problem, p, problem.l, problem.m, floor);
    return a;
}

std::vector<double> shift_coefficient(const LichnerowiczProblem& problem, const std::vector<double>& lo,
                                      const std::vector<double>& hi, double floor) {
    std::vector<double> a(problem.size(), 0.0);
    for (std::size_t p = 0; p < a.size(); ++p) a[p] = shift_at(problem, p, lo[p], hi[p], floor);
    return a;
}

void PicardTrace::write_csv(std::ostream& os) const {
    os << "iterate,sup_diff,bracket_violation\n";
    char buf[96];
    for (std::size_t i = 0; i < sup_diff.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, sup_diff[i], bracket_violation[i]);
        os << buf;
    }
}

std::vector<double> lichnerowicz_residual(const LichnerowiczProblem& problem, const DiscreteOperator& lap,
                                          const std::vector<double>& phi) {
    std::vector<double> r = lap.apply(phi);
    const auto& dofs = lap.domain.dof_nodes();
    for (std::size_t i = 0; i < dofs.size(); ++i) r[i] -= problem.h(dofs[i], phi[dofs[i]]);
    return r;
}

PicardResult picard_solve(const LichnerowiczProblem& problem, const DiscreteOperator& lap,
                          const std::vector<double>& lower, const std::vector<double>& upper,
                          const PicardOptions& opt, const std::vector<double>* start) {
    const std::size_t N = problem.size();
    if (lap.kind != BlockKind::scalar || lap.domain.chart().node_count() != N)
        throw ConfigError("picard_solve: operator does not match the problem");
    if (lower.size() != N || upper.size() != N) throw ConfigError("picard_solve: barrier size mismatch");
    bool negative_powers = false;
    for (const PowerTerm& t : problem.terms)
        for (double c : t.coef)
            if (c != 0.0 && t.power.to_double() < 0.0) {
                negative_powers = true;
                break;
            }
    if (!(problem.m >= problem.l) || problem.l < 0.0 || (negative_powers && !(problem.l > 0.0)))
        throw PreconditionError("picard_solve: bracket [l, m] is not admissible");
    const double eps = opt.mp_slack * problem.m;
    const double tiny = 1e-12 * std::max(1.0, problem.m);
    for (std::size_t p = 0; p < N; ++p) {
        if (lower[p] > upper[p] + tiny || lower[p] < problem.l - tiny || upper[p] > problem.m + tiny)
            throw PreconditionError("picard_solve: barriers are not ordered inside [l, m] at node " +
                                    std::to_string(p));
        if (!lap.domain.is_dof(p) &&
            (problem.boundary[p] < lower[p] - tiny || problem.boundary[p] > upper[p] + tiny))
            throw PreconditionError("picard_solve: boundary value outside the barriers at node " +
                                    std::to_string(p));
    }

    std::vector<double> phi(N);
    for (std::size_t p = 0; p < N; ++p) {
        if (!lap.domain.is_dof(p)) {
            phi[p] = problem.boundary[p];
            continue;
        }
        switch (opt.start) {
            case PicardStart::lower: phi[p] = lower[p]; break;
            case PicardStart::midpoint: phi[p] = 0.5 * (lower[p] + upper[p]); break;
            case PicardStart::given:
                if (!start) throw PreconditionError("picard_solve: start field missing");
                phi[p] = (*start)[p];
                break;
        }
    }

    const auto& dofs = lap.domain.dof_nodes();
    // From φ₋ a decreasing companion sequence runs from φ₊ with the same shift.
    // Both stay ordered and monotone as long as the shift dominates h' on the
    // current bracket [φ_k, φ̄_k], which shrinks onto the solution.
    const bool two_sided = opt.start == PicardStart::lower && !opt.newton;
    std::vector<double> roof;
    if (two_sided) {
        roof = phi;
        for (std::size_t p : lap.domain.dof_nodes()) roof[p] = upper[p];
    }
    std::vector<double> a(dofs.size());
    auto update_shift = [&](const std::vector<double>& lo_f, const std::vector<double>& hi_f) {
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const std::size_t p = dofs[i];
            a[i] = shift_at(problem, p, std::max(lo_f[p], lower[p]), std::max(lower[p], std::min(hi_f[p], upper[p])),
                            1e-8);
        }
    };
    update_shift(lower, upper);
    LinearSolveOptions lo;
    lo.tol = opt.linear_tol;
    lo.method = opt.newton ? SolverMethod::bicgstab : SolverMethod::cg;

    PicardResult res;
    PicardTrace& tr = res.trace;
    std::vector<double> f(dofs.size());
    for (int it = 1; it <= opt.max_iter; ++it) {
        std::vector<double> next;
        if (!opt.newton) {
            if (two_sided) {
                update_shift(phi, roof);
                for (std::size_t i = 0; i < dofs.size(); ++i) {
                    const std::size_t p = dofs[i];
                    f[i] = problem.h(p, roof[p]) - a[i] * roof[p];
                }
                roof = solve_dirichlet(lap, a, f, problem.boundary, lo, roof);
            }
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                const std::size_t p = dofs[i];
                f[i] = problem.h(p, phi[p]) - a[i] * phi[p];
            }
            next = solve_dirichlet(lap, a, f, problem.boundary, lo, phi);
        } else {
            // (Δ − h'(φ))δ = h(φ) − Δφ, damped until the residual decreases.
            const std::vector<double> r0 = lichnerowicz_residual(problem, lap, phi);
            std::vector<double> jd(dofs.size());
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                jd[i] = problem.dh(dofs[i], phi[dofs[i]]);
                f[i] = -r0[i];
            }
            const std::vector<double> zero(N, 0.0);
            const std::vector<double> delta = solve_dirichlet(lap, jd, f, zero, lo);
            const double n0 = norm_inf(r0);
            double step = 1.0;
            for (int k = 0; k < 30; ++k, step *= 0.5) {
                next = phi;
                bool positive = true;
                for (std::size_t p : dofs) {
                    next[p] = phi[p] + step * delta[p];
                    positive = positive && next[p] > 0.0;
                }
                if (positive && norm_inf(lichnerowicz_residual(problem, lap, next)) < n0) break;
            }
        }

        double diff = 0.0, minc = std::numeric_limits<double>::infinity();
        double lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v, barrier = 0.0;
        std::size_t worst = 0;
        for (std::size_t p : dofs) {
            const double dlt = next[p] - phi[p];
            diff = std::max(diff, std::abs(dlt));
            minc = std::min(minc, dlt);
            lo_v = std::min(lo_v, next[p]);
            hi_v = std::max(hi_v, next[p]);
            const double v = std::max(lower[p] - next[p], next[p] - upper[p]);
            if (v > barrier) {
                barrier = v;
                worst = p;
            }
        }
        tr.sup_diff.push_back(diff);
        tr.min_increment.push_back(dofs.empty() ? 0.0 : minc);
        tr.bracket_violation.push_back(
            dofs.empty() ? 0.0 : std::max({0.0, problem.l - lo_v, hi_v - problem.m}));
        tr.barrier_violation.push_back(barrier);
        if (two_sided) {
            double gap = 0.0;
            for (std::size_t p : dofs) gap = std::max(gap, roof[p] - next[p]);
            tr.bracket_gap.push_back(gap);
        }
        tr.iterations = it;
        if (tr.sup_diff.size() >= 2 && tr.sup_diff[tr.sup_diff.size() - 2] > 0.0)
            tr.contraction = diff / tr.sup_diff[tr.sup_diff.size() - 2];
        if (opt.check_bracket && barrier > eps)
            throw BracketingError("picard_solve: iterate " + std::to_string(it) + " leaves the barriers by " +
                                      std::to_string(barrier) + " at node " + std::to_string(worst),
                                  worst, it);
        phi = std::move(next);
        if (diff <= opt.tol) {
            tr.converged = true;
            break;
        }
    }
    const std::vector<double> r = lichnerowicz_residual(problem, lap, phi);
    tr.equation_residual = norm_inf(r);
    res.phi = std::move(phi);
    if (!tr.converged) {
        const std::string msg = "picard_solve: no convergence in " + std::to_string(opt.max_iter) +
                                " iterations (last sup-difference " +
                                std::to_string(tr.sup_diff.empty() ? 0.0 : tr.sup_diff.back()) + ")";
        throw PicardError(msg, std::move(res));
    }
    return res;
}

std::optional<std::pair<double, double>> constant_barriers(const LichnerowiczProblem& problem, double lo,
                                                           double hi) {
    const std::size_t N = problem.size();
    auto max_h = [&](double c) {
        double s = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < N; ++p) s = std::max(s, problem.h(p, c));
        return s;
    };
    auto min_h = [&](double c) {
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < N; ++p) s = std::min(s, problem.h(p, c));
        return s;
    };
    // Upper: smallest c with h(c) ≥ 0 everywhere; lower: largest c with h(c) ≤ 0 everywhere.
    if (min_h(hi) < 0.0 || max_h(lo) > 0.0) return std::nullopt;
    double a = lo, b = hi;
    for (int i = 0; i < 200 && b - a > 1e-14 * b; ++i) {
        const double c = std::sqrt(a * b);
        (min_h(c) >= 0.0 ? b : a) = c;
    }
    const double m = b;
    a = lo;
    b = m;
    if (max_h(b) <= 0.0) return std::make_pair(b, m);
    for (int i = 0; i < 200 && b - a > 1e-14 * b; ++i) {
        const double c = std::sqrt(a * b);
        (max_h(c) <= 0.0 ? a : b) = c;
    }
    return std::make_pair(a, m);
}

}  // namespace cforge

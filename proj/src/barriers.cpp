#include "cforge/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const DiscreteOperator& laplacian_of(const BarrierContext& ctx) {
    if (!ctx.metric || !ctx.curvature || !ctx.laplacian)
        throw PreconditionError("barrier context is incomplete");
    return *ctx.laplacian;
}

std::vector<double> on_dofs(const DiscreteOperator& op, const std::vector<double>& full) {
    return op.gather(full);
}

double norm_gamma_covector(const Mat3& ginv, const Vec3& w, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            s += at(ginv, a, b) * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)];
    return std::sqrt(std::max(0.0, s));
}

double lp_exponent(const ConformalConstants& k, double p) { return p > 0.0 ? p : 2.0 * k.n; }

/// |R| + Σ max(L², L^p) norms + |U|_γ + ε₁ + ε₂ + ε₃ at every node.
std::vector<double> smallness_lhs(const BarrierContext& ctx, const ConformalData& data, double p) {
    const MetricField& g = *ctx.metric;
    const int d = g.dim();
    const double norms = covector_norms(g, data.dtau, p).max() + covector_norms(g, data.omega1, p).max() +
                         covector_norms(g, data.omega2, p).max();
    std::vector<double> lhs(g.size());
    for (std::size_t q = 0; q < lhs.size(); ++q) {
        const double u = std::sqrt(std::max(0.0, contract_raised(data.U[q], data.U[q], g.ginv(q), d)));
        lhs[q] = std::abs(ctx.curvature->scalar[q]) + norms + u + data.eps1[q] + data.eps2[q] + data.eps3[q];
    }
    return lhs;
}

double ratio_max(const std::vector<double>& lhs, const std::vector<double>& tau2) {
    double c = 0.0;
    for (std::size_t q = 0; q < lhs.size(); ++q) c = std::max(c, tau2[q] > 0.0 ? lhs[q] / tau2[q] : inf);
    return c;
}

}  // namespace

std::vector<double> supersolution_coefficient(const BarrierContext& ctx, const ConformalData& data) {
    const double c_n = ctx.constants.c_n().to_double();
    const double b_n = ctx.constants.b_n().to_double();
    std::vector<double> a(data.tau.size());
    for (std::size_t q = 0; q < a.size(); ++q)
        a[q] = c_n * ctx.curvature->scalar[q] + b_n * data.tau[q] * data.tau[q];
    return a;
}

std::vector<double> build_supersolution(const BarrierContext& ctx, const ConformalData& data, double c_plus,
                                        std::vector<double>* v_out) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    if (!(c_plus >= 0.0)) throw PreconditionError("build_supersolution: c_plus must be non-negative");
    const std::vector<double> a = supersolution_coefficient(ctx, data);
    for (std::size_t q = 0; q < a.size(); ++q)
        if (!(a[q] > 0.0))
            throw HypothesisError("supersolution: a = c_n R + b_n tau^2 = " + std::to_string(a[q]) +
                                      " is not positive at node " + std::to_string(q),
                                  static_cast<long>(q));
    const std::vector<double> ad = on_dofs(lap, a);
    std::vector<double> f(ad.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = -ad[i];
    const std::vector<double> bc(a.size(), c_plus);
    std::vector<double> v = solve_dirichlet(lap, ad, f, bc, ctx.linear);
    std::vector<double> phi(v.size());
    for (std::size_t q = 0; q < v.size(); ++q) phi[q] = 1.0 + v[q];
    if (v_out) *v_out = std::move(v);
    return phi;
}

std::vector<double> subsolution_source(const ConformalConstants& k, const ConformalData& data) {
    std::vector<double> s(data.eps2.size());
    for (std::size_t q = 0; q < s.size(); ++q)
        s[q] = k.n <= 6 ? 0.5 * (data.eps2[q] + data.eps3[q]) : 0.5 * data.eps2[q];
    return s;
}

SubsolutionResult build_subsolution_nonvacuum(const BarrierContext& ctx, const ConformalData& data,
                                              double c_minus) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    const std::vector<double> lam = subsolution_source(ctx.constants, data);
    for (std::size_t q = 0; q < lam.size(); ++q)
        if (!(lam[q] > 0.0))
            throw VacuumError(std::string("subsolution: ") + (ctx.constants.n <= 6 ? "eps2 + eps3" : "eps2") +
                                  " vanishes at node " + std::to_string(q) + "; use the yamabe route",
                              static_cast<long>(q));
    const std::vector<double> a = supersolution_coefficient(ctx, data);
    for (std::size_t q = 0; q < a.size(); ++q)
        if (!(a[q] > 0.0))
            throw HypothesisError("subsolution: a is not positive at node " + std::to_string(q),
                                  static_cast<long>(q));

    SubsolutionResult r;
    if (c_minus < 0.0) {
        c_minus = inf;
        for (std::size_t q = 0; q < a.size(); ++q) c_minus = std::min(c_minus, lam[q] / a[q]);
    }
    r.c_minus = c_minus;
    const std::vector<double> ad = on_dofs(lap, a);
    std::vector<double> f = on_dofs(lap, lam);
    for (double& x : f) x = -x;
    r.u = solve_dirichlet(lap, ad, f, std::vector<double>(a.size(), c_minus), ctx.linear);

    double sup_u = 0.0, min_u = inf;
    for (double x : r.u) {
        sup_u = std::max(sup_u, x);
        min_u = std::min(min_u, x);
    }
    if (!(min_u > 0.0)) throw HypothesisError("subsolution: auxiliary solution is not positive");
    // With Λ₋ as above the sign condition 2c_n(ε₂+ε₃) ≥ αΛ₋ reads α ≤ 4c_n.
    const double c_n = ctx.constants.c_n().to_double();
    double cap = 1.0 / sup_u;
    for (std::size_t q = 0; q < lam.size(); ++q) {
        const double src = ctx.constants.n <= 6 ? data.eps2[q] + data.eps3[q] : data.eps2[q];
        cap = std::min(cap, 2.0 * c_n * src / lam[q]);
    }
    r.alpha = 0.99 * cap;
    r.phi.resize(r.u.size());
    for (std::size_t q = 0; q < r.u.size(); ++q) r.phi[q] = r.alpha * r.u[q];
    return r;
}

YamabeResult solve_yamabe_auxiliary(const BarrierContext& ctx, const ConformalData& data, const YamabeOptions& opt) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    if (!(opt.u0 >= 0.0)) throw PreconditionError("yamabe: boundary value u0 must be non-negative");
    const std::size_t N = data.tau.size();
    const double c_n = ctx.constants.c_n().to_double();
    const double b_n = ctx.constants.b_n().to_double();
    const Rational crit = ctx.constants.critical();
    const double sigma = crit.to_double();

    // Δu = lin·u + b_n τ² u^N.
    LichnerowiczProblem P;
    std::vector<double> lin(N), quad(N);
    for (std::size_t q = 0; q < N; ++q) {
        lin[q] = opt.choice == YamabeChoice::R_tau ? c_n * ctx.curvature->scalar[q] : -2.0 * c_n * data.eps3[q];
        quad[q] = b_n * data.tau[q] * data.tau[q];
    }
    if (opt.choice == YamabeChoice::eps3_tau)
        for (std::size_t q = 0; q < N; ++q)
            if (ctx.curvature->scalar[q] > 1e-10)
                throw HypothesisError("yamabe eps3_tau route requires R <= 0; R = " +
                                          std::to_string(ctx.curvature->scalar[q]) + " at node " + std::to_string(q),
                                      static_cast<long>(q));
    P.terms.push_back({"lin", 1.0, lin, Rational{1}});
    P.terms.push_back({"tau", 1.0, quad, crit});
    P.boundary.assign(N, opt.u0);

    YamabeResult r;
    double u_hi = opt.u0;
    for (std::size_t q = 0; q < N; ++q) {
        if (lin[q] >= 0.0) continue;
        if (std::abs(data.tau[q]) <= opt.tau_zero_tol)
            throw RouteError("yamabe: no constant upper barrier, tau vanishes where the linear coefficient is "
                             "negative (node " + std::to_string(q) + ")",
                             static_cast<long>(q));
        u_hi = std::max(u_hi, std::pow(-lin[q] / quad[q], 1.0 / (sigma - 1.0)));
    }
    if (!(u_hi > 0.0)) throw RouteError("yamabe: zero boundary data and no negative linear coefficient");
    r.u_hi = u_hi;

    std::vector<double> lower(N, 0.0);
    const auto& dofs = lap.domain.dof_nodes();
    if (!(opt.u0 > 0.0)) {
        const SpectralEstimate e = lambda1_schrodinger(*ctx.metric, lin, lap.domain, opt.eigen);
        r.lambda_m = e.lambda;
        if (!(e.lambda < 0.0))
            throw RouteError("yamabe: zero boundary data and lambda1 = " + std::to_string(e.lambda) +
                             " >= 0; the auxiliary equation has no positive solution");
        double delta = inf, emax = 0.0;
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const double ei = std::abs(e.vector[i]);
            emax = std::max(emax, ei);
            const double qd = quad[dofs[i]] * std::pow(ei, sigma - 1.0);
            if (qd > 0.0) delta = std::min(delta, std::pow(-e.lambda / qd, 1.0 / (sigma - 1.0)));
        }
        delta = 0.5 * std::min(delta, u_hi / emax);
        for (std::size_t i = 0; i < dofs.size(); ++i) lower[dofs[i]] = delta * std::abs(e.vector[i]);
        r.u_lo_scale = delta;
    }
    P.l = 0.0;
    P.m = u_hi;
    PicardOptions po = opt.picard;
    po.start = PicardStart::lower;
    PicardResult pr = picard_solve(P, lap, lower, std::vector<double>(N, u_hi), po);
    r.u = std::move(pr.phi);
    r.trace = std::move(pr.trace);
    return r;
}

YamabeResult build_subsolution_yamabe(const BarrierContext& ctx, const ConformalData& data,
                                      const YamabeOptions& opt) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    const std::size_t N = data.tau.size();
    const double c_n = ctx.constants.c_n().to_double();
    const std::vector<std::uint8_t> zero = zero_set_mask(data.tau, opt.tau_zero_tol);
    if (std::all_of(zero.begin(), zero.end(), [](std::uint8_t z) { return z != 0; }))
        throw HypothesisError("yamabe: tau vanishes identically, so B0 is the whole chart and the two spectral "
                              "conditions cannot both hold");
    std::vector<double> potential(N);
    for (std::size_t q = 0; q < N; ++q)
        potential[q] =
            opt.choice == YamabeChoice::R_tau ? c_n * ctx.curvature->scalar[q] : -2.0 * c_n * data.eps3[q];

    std::vector<std::uint8_t> b0(N, 0);
    for (std::size_t q = 0; q < N; ++q) b0[q] = zero[q] && lap.domain.is_dof(q);
    const Domain b0_domain = Domain::from_mask(ctx.metric->chart(), b0);
    const double lb0 = lambda1_schrodinger(*ctx.metric, potential, b0_domain, opt.eigen).lambda;
    const double lm = lambda1_schrodinger(*ctx.metric, potential, lap.domain, opt.eigen).lambda;
    if (!(lb0 > 0.0))
        throw HypothesisError("yamabe: lambda1 on the zero set of tau is " + std::to_string(lb0) + ", not positive");
    if (!(lm < 0.0))
        throw HypothesisError("yamabe: lambda1 on the domain is " + std::to_string(lm) + ", not negative");

    YamabeResult r = solve_yamabe_auxiliary(ctx, data, opt);
    r.lambda_b0 = lb0;
    r.lambda_m = lm;
    double sup_u = 0.0, min_dof = inf;
    for (double x : r.u) sup_u = std::max(sup_u, x);
    for (std::size_t q : lap.domain.dof_nodes()) min_dof = std::min(min_dof, r.u[q]);
    if (!(min_dof > 0.0)) throw HypothesisError("yamabe: auxiliary solution is not positive");
    r.kappa = 0.99 * std::min(1.0, 1.0 / sup_u);
    r.phi.resize(N);
    // Raising φ₋ at fixed nodes only increases Δ_h φ₋ at the adjacent dofs.
    for (std::size_t q = 0; q < N; ++q)
        r.phi[q] = r.kappa * (lap.domain.is_dof(q) ? r.u[q] : std::max(r.u[q], min_dof));
    return r;
}

NormPair covector_norms(const MetricField& metric, const std::vector<Vec3>& w, double p) {
    const GridChart& c = metric.chart();
    const int d = metric.dim();
    const double cell = c.cell_volume();
    double s2 = 0.0, sp = 0.0, top = 0.0;
    std::vector<double> m(w.size());
    for (std::size_t q = 0; q < w.size(); ++q) {
        m[q] = norm_gamma_covector(metric.ginv(q), w[q], d);
        top = std::max(top, m[q]);
    }
    NormPair r;
    if (top == 0.0) return r;
    for (std::size_t q = 0; q < w.size(); ++q) {
        const double wt = cell * metric.sqrt_det(q);
        s2 += wt * m[q] * m[q];
        sp += wt * std::pow(m[q] / top, p);
    }
    r.l2 = std::sqrt(s2);
    r.lp = top * std::pow(sp, 1.0 / p);
    return r;
}

std::vector<double> k_tilde_squared(const MetricField& metric, const std::vector<Mat3>& LX,
                                    const std::vector<Mat3>& U) {
    const int d = metric.dim();
    std::vector<double> k2(metric.size());
    for (std::size_t q = 0; q < k2.size(); ++q) {
        Mat3 a = U[q];
        if (!LX.empty())
            for (std::size_t e = 0; e < 9; ++e) a[e] += LX[q][e];
        k2[q] = contract_raised(a, a, metric.ginv(q), d);
    }
    return k2;
}

std::vector<double> lichnerowicz_operator(const BarrierContext& ctx, const ConformalData& data,
                                          const std::vector<double>& k2, const std::vector<double>& phi) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    const LichnerowiczProblem P = make_lichnerowicz(ctx.constants, ctx.curvature->scalar, k2, data, phi, 0.0, 0.0);
    return lichnerowicz_residual(P, lap, phi);
}

Certificate certify_barriers(const BarrierPair& pair, const BarrierContext& ctx, const ConformalData& data,
                             double lambda1_conf, const CertifyOptions& opt, const std::vector<Vec3>* X) {
    const MetricField& g = *ctx.metric;
    Certificate c = pair.cert;
    c.mode = opt.mode;
    const std::size_t N = g.size();
    std::vector<double> k2_super, k2_sub;
    if (opt.mode == CertifyMode::posteriori) {
        if (!X) throw PreconditionError("certify_barriers: posteriori mode needs a momentum solution");
        k2_super = k_tilde_squared(g, conformal_killing_operator(g, *X), data.U);
        k2_sub = k2_super;
        c.m_bound = 0.0;
    } else {
        if (!(lambda1_conf > 0.0))
            throw SpectralError("certify_barriers: worst-case mode needs lambda1_conf > 0, got " +
                                std::to_string(lambda1_conf));
        const double p = lp_exponent(ctx.constants, opt.p);
        const double m = *std::max_element(pair.upper.begin(), pair.upper.end());
        const double mt = covector_norms(g, data.dtau, p).max();
        const double m1 = covector_norms(g, data.omega1, p).max();
        const double m2 = covector_norms(g, data.omega2, p).max();
        c.m_bound = opt.c_cert / lambda1_conf *
                    (mt * std::pow(m, ctx.constants.tau_power().to_double()) +
                     m1 * std::pow(m, ctx.constants.omega1_power().to_double()) + m2);
        const std::vector<double> u2 = k_tilde_squared(g, {}, data.U);
        k2_super.resize(N);
        for (std::size_t q = 0; q < N; ++q) k2_super[q] = 2.0 * (c.m_bound + u2[q]);
        // |K̃|² enters H with a positive sign, so zero is the worst case for φ₋.
        k2_sub.assign(N, 0.0);
    }
    c.k2_bound = k2_super.empty() ? 0.0 : *std::max_element(k2_super.begin(), k2_super.end());
    const std::vector<double> hs = lichnerowicz_operator(ctx, data, k2_super, pair.upper);
    const std::vector<double> hl = lichnerowicz_operator(ctx, data, k2_sub, pair.lower);
    c.super_margin = hs.empty() ? 0.0 : *std::max_element(hs.begin(), hs.end());
    c.sub_margin = hl.empty() ? 0.0 : *std::min_element(hl.begin(), hl.end());
    c.certified = c.super_margin <= opt.tol && c.sub_margin >= -opt.tol;
    return c;
}

HypothesisReport check_hypotheses(const BarrierContext& ctx, const ConformalData& data,
                                  const HypothesisOptions& opt) {
    const DiscreteOperator& lap = laplacian_of(ctx);
    const MetricField& g = *ctx.metric;
    const GridChart& chart = g.chart();
    const std::size_t N = g.size();
    const ConformalConstants& k = ctx.constants;
    HypothesisReport r;

    const std::vector<double> a = supersolution_coefficient(ctx, data);
    r.a0 = *std::min_element(a.begin(), a.end());
    if (opt.lambda1_conf)
        r.lambda1_conf = *opt.lambda1_conf;
    else if (opt.spectral && chart.has_dirichlet())
        r.lambda1_conf = lambda1_conf(g, lap.domain, opt.eigen).lambda;
    else
        r.lambda1_conf = std::nan("");

    r.eps_positive = true;
    for (std::size_t q = 0; q < N; ++q) {
        const double e = k.n <= 6 ? data.eps2[q] + data.eps3[q] : data.eps2[q];
        r.eps_positive = r.eps_positive && e > 0.0;
    }

    r.smallness_lhs = smallness_lhs(ctx, data, lp_exponent(k, opt.p));
    std::vector<double> tau2(N);
    for (std::size_t q = 0; q < N; ++q) {
        tau2[q] = std::abs(data.tau[q]) <= opt.tau_zero_tol ? 0.0 : data.tau[q] * data.tau[q];
        if (tau2[q] == 0.0) r.tau_zero_nodes.push_back(q);
    }
    r.min_C = ratio_max(r.smallness_lhs, tau2);

    const Vec3 centre = chart.center();
    const double n1 = k.n - 1.0;
    r.curvature_A = 0.0;
    r.ricci_H2 = 0.0;
    for (std::size_t q = 0; q < N; ++q) {
        const Vec3 x = chart.coord(q);
        double r2 = 0.0;
        for (int ax = 0; ax < chart.dim(); ++ax) {
            const double dx = x[static_cast<std::size_t>(ax)] - centre[static_cast<std::size_t>(ax)];
            r2 += dx * dx;
        }
        r.ricci_H2 = std::max(r.ricci_H2, -ctx.curvature->ricci_min[q] / (n1 * (1.0 + r2)));
        r.curvature_A = std::max(r.curvature_A, -ctx.curvature->scalar[q]);
    }
    r.tau_B = inf;
    for (std::size_t q = 0; q < N; ++q)
        if (opt.compact.empty() || !opt.compact[q]) r.tau_B = std::min(r.tau_B, std::abs(data.tau[q]));
    if (r.tau_B == inf) r.tau_B = 0.0;

    if (opt.spectral) {
        const double c_n = k.c_n().to_double();
        std::vector<double> pot(N);
        for (std::size_t q = 0; q < N; ++q) pot[q] = c_n * ctx.curvature->scalar[q];
        const std::vector<std::uint8_t> zero = zero_set_mask(data.tau, opt.tau_zero_tol);
        std::vector<std::uint8_t> b0(N, 0);
        for (std::size_t q = 0; q < N; ++q) b0[q] = zero[q] && lap.domain.is_dof(q);
        r.lambda_b0 = lambda1_schrodinger(g, pot, Domain::from_mask(chart, b0), opt.eigen).lambda;
        r.lambda_m = chart.has_dirichlet() ? lambda1_schrodinger(g, pot, lap.domain, opt.eigen).lambda
                                           : std::nan("");
        r.yamabe_ok = r.lambda_b0 > 0.0 && r.lambda_m < 0.0 && r.tau_B > 0.0;
    }
    return r;
}

SweepResult sweep_tau0(const BarrierContext& ctx, const ConformalData& data, double lo, double hi, int steps,
                       double c_target, double p) {
    if (!(lo > 0.0) || steps < 1 || (steps > 1 && !(hi > lo)) || (steps == 1 && hi < lo))
        throw ConfigError("sweep_tau0: empty or non-positive tau0 range");
    const std::size_t N = data.tau.size();
    const std::vector<double> base = smallness_lhs(ctx, data, lp_exponent(ctx.constants, p));
    std::vector<double> lhs(N);
    for (std::size_t q = 0; q < N; ++q) lhs[q] = base[q] + data.tau[q] * data.tau[q];
    const double top = *std::max_element(lhs.begin(), lhs.end());

    SweepResult r;
    r.threshold = std::nan("");
    for (int i = 0; i < steps; ++i) {
        const double t0 = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
        SweepRow row{t0, top / (t0 * t0), false};
        row.pass = row.min_C <= c_target;
        if (row.pass && std::isnan(r.threshold)) r.threshold = t0;
        if (!r.rows.empty() && row.min_C > r.rows.back().min_C) r.monotone = false;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace cforge

#include "cforge/coupled.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

struct LevelSetup {
    const DiscreteOperator* lap = nullptr;  ///< Lichnerowicz domain
    const DiscreteOperator* lap_full = nullptr;
    const DiscreteOperator* ckl = nullptr;
    double lambda1 = 0.0;
    std::vector<double> boundary;
    std::vector<double> phi0;
    bool em = false;
};

void require_barriers(const BarrierPair& b, std::size_t n) {
    if (b.lower.size() != n || b.upper.size() != n)
        throw PreconditionError("coupled solve: barriers are missing or have the wrong size");
}

std::vector<double> midpoint(const BarrierPair& b) {
    std::vector<double> m(b.lower.size());
    for (std::size_t p = 0; p < m.size(); ++p) m[p] = 0.5 * (b.lower[p] + b.upper[p]);
    return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) s = std::max(s, std::abs(a[p] - b[p]));
    return s;
}

double sup_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        for (std::size_t i = 0; i < 3; ++i) s = std::max(s, std::abs(a[p][i] - b[p][i]));
    return s;
}

double h2_norm(const DiscreteOperator& lap, const std::vector<double>& delta) {
    const std::vector<double> ld = lap.apply(delta);
    const auto& dofs = lap.domain.dof_nodes();
    double s = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const double v = delta[dofs[i]];
        s += lap.mass[i] * (v * v + ld[i] * ld[i]);
    }
    return std::sqrt(s);
}

void finish_level(LevelRecord& rec, int rho_from) {
    rec.rho = 0.0;
    double any = 0.0;
    for (std::size_t j = 1; j < rec.outer.size(); ++j) {
        const double prev = rec.outer[j - 1].residual;
        if (!(prev > 0.0)) continue;
        const double ratio = rec.outer[j].residual / prev;
        any = ratio;
        if (static_cast<int>(j) >= rho_from) rec.rho = std::max(rec.rho, ratio);
    }
    if (rec.rho == 0.0) rec.rho = any;
    const std::size_t m = rec.outer.size();
    rec.X_growth = m >= 3 && rec.outer[m - 1].X_norm > rec.outer[m - 2].X_norm * (1.0 + 1e-6) &&
                   rec.outer[m - 2].X_norm > rec.outer[m - 3].X_norm * (1.0 + 1e-6);
}

void run_level(const CoupledContext& ctx, const LevelSetup& L, const ConformalData& data, const BarrierPair& B,
               const CoupledOptions& opt, SolveSession& session) {
    const MetricField& g = *ctx.metric;
    const int d = g.dim();
    const std::size_t N = g.size();
    LevelRecord& rec = session.levels.back();
    rec.phi = L.phi0;
    rec.X = data.bc_v.empty() ? std::vector<Vec3>(N, Vec3{}) : data.bc_v;
    if (L.em) rec.f = data.bc_w.empty() ? std::vector<double>(N, 0.0) : data.bc_w;
    if (opt.max_outer <= 0)
        throw CoupledError("coupled solve: max_outer = 0, no outer iterate performed", session);

    MomentumOptions mo;
    mo.linear = opt.momentum_linear;
    mo.lambda1 = L.lambda1;
    const double tp = ctx.constants.tau_power().to_double();

    for (int j = 1; j <= opt.max_outer; ++j) {
        OuterRecord o;
        const ConformalData* eff = &data;
        ConformalData em_data;
        std::vector<double> f_new;
        if (L.em) {
            const auto& dofs = L.lap_full->domain.dof_nodes();
            std::vector<double> rhs(dofs.size());
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                const std::size_t p = dofs[i];
                rhs[i] = data.em->q[p] * std::pow(rec.phi[p], tp) + (data.force_f.empty() ? 0.0 : data.force_f[p]);
            }
            LinearSolveOptions lo = opt.momentum_linear;
            f_new = solve_dirichlet(*L.lap_full, {}, rhs, rec.f, lo, rec.f);
            o.f_diff = sup_diff(f_new, rec.f);
            em_data = with_em_sources(data, g, f_new);
            eff = &em_data;
        }

        std::vector<Vec3> rhs = momentum_rhs(rec.phi, *eff, ctx.constants, d);
        if (!data.force_X.empty())
            for (std::size_t p = 0; p < N; ++p)
                for (std::size_t i = 0; i < 3; ++i) rhs[p][i] += data.force_X[p][i];
        const MomentumSolution ms = solve_momentum(*L.ckl, g, rhs, rec.X, mo, &rec.X);
        o.momentum_residual = ms.residual;
        o.X_norm = ms.norm_X + ms.norm_LX;
        rec.momentum_report = ms.report;

        const std::vector<double> k2 = k_tilde_squared(g, ms.LX, data.U);
        const LichnerowiczProblem P =
            make_lichnerowicz(ctx.constants, ctx.curvature->scalar, k2, *eff, L.boundary, B.l, B.m);
        PicardOptions po = opt.picard;
        // Every inner solve restarts from φ₋ so its iterates increase monotonically;
        // φ₀ only seeds the first momentum solve.
        po.start = PicardStart::lower;
        PicardResult pr = picard_solve(P, *L.lap, B.lower, B.upper, po, &rec.phi);

        std::vector<double> delta(N);
        for (std::size_t p = 0; p < N; ++p) delta[p] = pr.phi[p] - rec.phi[p];
        o.phi_diff = sup_diff(pr.phi, rec.phi);
        o.X_diff = sup_diff(ms.X, rec.X);
        o.residual = o.phi_diff + o.X_diff + o.f_diff;
        o.h2_diff = h2_norm(*L.lap, delta);
        o.picard_iterations = pr.trace.iterations;

        rec.phi = std::move(pr.phi);
        rec.X = ms.X;
        if (L.em) rec.f = std::move(f_new);
        rec.picard.push_back(std::move(pr.trace));
        rec.outer.push_back(o);
        if (o.residual <= opt.tol) {
            rec.converged = true;
            break;
        }
    }
    finish_level(rec, opt.rho_from);
    if (!rec.converged)
        throw CoupledError("coupled solve: level " + std::to_string(rec.level) + " did not converge in " +
                               std::to_string(opt.max_outer) + " outer iterations (last residual " +
                               std::to_string(rec.outer.back().residual) + ")",
                           session);
}

double resolve_lambda1(const MetricField& g, const DiscreteOperator& ckl, const CoupledOptions& opt) {
    if (opt.lambda1_conf) return *opt.lambda1_conf;
    return lambda1_conf(g, ckl.domain, opt.eigen).lambda;
}

std::vector<double> outer_boundary(const ConformalData& data, const BarrierPair& B) {
    return data.bc_u.empty() ? midpoint(B) : data.bc_u;
}

SolveSession compact_impl(const CoupledContext& ctx, const ConformalData& data, const BarrierPair& B,
                          const CoupledOptions& opt, bool em) {
    if (!ctx.metric || !ctx.curvature) throw PreconditionError("coupled solve: context is incomplete");
    const MetricField& g = *ctx.metric;
    require_barriers(B, g.size());
    if (!g.chart().has_dirichlet()) throw PreconditionError("coupled solve: needs a Dirichlet chart");
    const Domain dom = Domain::full(g.chart());
    const DiscreteOperator lap = assemble_laplace_beltrami(g, dom);
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, dom);

    SolveSession s;
    s.mode = em ? SessionMode::em : SessionMode::compact;
    s.lambda1_conf = resolve_lambda1(g, ckl, opt);
    LevelSetup L;
    L.lap = L.lap_full = &lap;
    L.ckl = &ckl;
    L.lambda1 = s.lambda1_conf;
    L.boundary = outer_boundary(data, B);
    L.phi0 = B.lower;
    for (std::size_t p = 0; p < L.phi0.size(); ++p)
        if (!dom.is_dof(p)) L.phi0[p] = L.boundary[p];
    L.em = em;
    s.levels.emplace_back();
    run_level(ctx, L, data, B, opt, s);
    return s;
}

}  // namespace

ConformalData with_em_sources(const ConformalData& data, const MetricField& metric, const std::vector<double>& f) {
    if (!data.em) return data;
    const std::size_t N = metric.size();
    std::vector<Vec3> E = gradient(metric.chart(), f);
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t i = 0; i < 3; ++i) E[p][i] += data.em->V[p][i];
    std::vector<double> e2;
    std::vector<Vec3> w2;
    em_sources(metric, data.em->F, E, e2, w2);
    ConformalData out = data;
    for (std::size_t p = 0; p < N; ++p) {
        out.eps2[p] += e2[p];
        for (std::size_t i = 0; i < 3; ++i) out.omega2[p][i] += w2[p][i];
    }
    return out;
}

SolveSession solve_coupled_compact(const CoupledContext& ctx, const ConformalData& data, const BarrierPair& barriers,
                                   const CoupledOptions& opt) {
    return compact_impl(ctx, data, barriers, opt, false);
}

SolveSession solve_coupled_em(const CoupledContext& ctx, const ConformalData& data, const BarrierPair& barriers,
                              const CoupledOptions& opt) {
    if (!data.em) throw PreconditionError("solve_coupled_em: data carry no electromagnetic pack");
    return compact_impl(ctx, data, barriers, opt, true);
}

SolveSession solve_coupled_exhaustion(const CoupledContext& ctx, const Exhaustion& exhaustion,
                                      const ConformalData& data, const BarrierPair& barriers,
                                      const CoupledOptions& opt) {
    if (!ctx.metric || !ctx.curvature) throw PreconditionError("coupled solve: context is incomplete");
    const MetricField& g = *ctx.metric;
    require_barriers(barriers, g.size());
    if (data.em) throw PreconditionError("exhaustion mode does not take an electromagnetic pack");
    const Domain full = Domain::full(g.chart());
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, full);

    SolveSession s;
    s.mode = SessionMode::exhaustion;
    s.lambda1_conf = resolve_lambda1(g, ckl, opt);
    const std::vector<double> mid = midpoint(barriers);
    const int K = exhaustion.levels();
    const std::vector<std::uint8_t> omega1 = exhaustion.mask(1);
    std::vector<double> prev;
    for (int k = 1; k <= K; ++k) {
        const DiscreteOperator lap = assemble_laplace_beltrami(g, exhaustion.domain(k));
        LevelSetup L;
        L.lap = &lap;
        L.lap_full = &lap;
        L.ckl = &ckl;
        L.lambda1 = s.lambda1_conf;
        L.boundary = k == K ? outer_boundary(data, barriers) : mid;
        // φ_{k−1} on Ω_{k−1}, (φ₊+φ₋)/2 elsewhere.
        L.phi0 = L.boundary;
        if (!prev.empty())
            for (std::size_t p = 0; p < g.size(); ++p)
                if (lap.domain.is_dof(p)) L.phi0[p] = prev[p];
        s.levels.emplace_back();
        s.levels.back().level = k;
        run_level(ctx, L, data, barriers, opt, s);
        const std::vector<double>& cur = s.levels.back().phi;
        if (!prev.empty()) {
            double dk = 0.0;
            for (std::size_t p = 0; p < g.size(); ++p)
                if (omega1[p]) dk = std::max(dk, std::abs(cur[p] - prev[p]));
            s.cauchy.push_back(dk);
        }
        prev = cur;
    }
    return s;
}

}  // namespace cforge

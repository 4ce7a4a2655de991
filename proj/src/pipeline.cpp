#include "cforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

std::string join(const std::string& dir, const std::string& file) { return dir + "/" + file; }

double vmin(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double vmax(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

BarrierContext make_context(const Problem& P, const DiscreteOperator& lap) {
    BarrierContext ctx;
    ctx.metric = &P.metric;
    ctx.curvature = &P.curv;
    ctx.laplacian = &lap;
    ctx.constants = P.k;
    ctx.linear = linear_options(P.cfg.solver);
    return ctx;
}

std::vector<double> scatter_dofs(const DiscreteOperator& op, const std::vector<double>& dof) {
    std::vector<double> full(op.domain.chart().node_count(), 0.0);
    op.scatter(dof, full);
    return full;
}

void add_certificate(Report& r, const std::string& prefix, const Certificate& c) {
    r.add(prefix + ".mode", std::string(c.mode == CertifyMode::worst_case   ? "worst_case"
                                        : c.mode == CertifyMode::posteriori ? "posteriori"
                                                                            : "none"));
    r.add(prefix + ".super_margin", c.super_margin);
    r.add(prefix + ".sub_margin", c.sub_margin);
    r.add(prefix + ".k2_bound", c.k2_bound);
    r.add(prefix + ".m_bound", c.m_bound);
    r.add(prefix + ".certified", c.certified);
}

void add_hypotheses(Report& r, const HypothesisReport& h) {
    r.add("hyp.a0", h.a0);
    r.add("hyp.lambda1_conf", h.lambda1_conf);
    r.add("hyp.eps_positive", h.eps_positive);
    r.add("hyp.min_C", h.min_C);
    r.add("hyp.tau_zero_nodes", h.tau_zero_nodes.size());
    r.add("hyp.ricci_H2", h.ricci_H2);
    r.add("hyp.curvature_A", h.curvature_A);
    r.add("hyp.tau_B", h.tau_B);
    r.add("hyp.lambda_b0", h.lambda_b0);
    r.add("hyp.lambda_m", h.lambda_m);
    r.add("hyp.yamabe_ok", h.yamabe_ok);
}

std::string route_name(const Certificate& c) {
    return c.route == BarrierRoute::yamabe ? "yamabe" : "linear_nonvacuum";
}

std::string session_text(const SolveSession& s) {
    Report r;
    r.add("mode", std::string(s.mode == SessionMode::compact ? "compact"
                              : s.mode == SessionMode::em    ? "em"
                                                             : "exhaustion"));
    r.add("lambda1_conf", s.lambda1_conf);
    r.add("levels", s.levels.size());
    for (const LevelRecord& L : s.levels) {
        const std::string p = "level." + std::to_string(L.level);
        r.add(p + ".converged", L.converged);
        r.add(p + ".outer_iterations", L.outer.size());
        r.add(p + ".rho", L.rho);
        r.add(p + ".X_growth", L.X_growth);
        for (std::size_t j = 0; j < L.outer.size(); ++j) {
            const OuterRecord& o = L.outer[j];
            const std::string q = p + ".outer." + std::to_string(j + 1);
            r.add(q + ".residual", o.residual);
            r.add(q + ".phi_diff", o.phi_diff);
            r.add(q + ".X_diff", o.X_diff);
            if (s.mode == SessionMode::em) r.add(q + ".f_diff", o.f_diff);
            r.add(q + ".h2_diff", o.h2_diff);
            r.add(q + ".picard_iterations", o.picard_iterations);
            r.add(q + ".momentum_residual", o.momentum_residual);
        }
    }
    for (std::size_t k = 0; k < s.cauchy.size(); ++k) r.add("cauchy." + std::to_string(k + 1), s.cauchy[k]);
    return r.str();
}

std::string picard_csv(const SolveSession& s) {
    std::ostringstream os;
    os << "level,outer,iterate,sup_diff,bracket_violation,min_increment\n";
    for (const LevelRecord& L : s.levels)
        for (std::size_t j = 0; j < L.picard.size(); ++j) {
            const PicardTrace& t = L.picard[j];
            for (std::size_t i = 0; i < t.sup_diff.size(); ++i)
                os << L.level << ',' << j + 1 << ',' << i + 1 << ',' << format_double(t.sup_diff[i]) << ','
                   << format_double(t.bracket_violation[i]) << ',' << format_double(t.min_increment[i]) << '\n';
        }
    return os.str();
}

}  // namespace

Problem build_problem(const RunConfig& cfg, int nodes) {
    Problem P;
    P.cfg = cfg;
    std::vector<int> counts = cfg.chart.nodes;
    if (nodes > 0) counts.assign(static_cast<std::size_t>(cfg.chart.dim), nodes);
    P.chart = GridChart::build(cfg.chart.dim, cfg.chart.extents, counts, cfg.chart.boundary, cfg.chart.origin);
    P.metric = metric_from_generator(P.chart, cfg.metric);
    P.curv = curvature(P.metric);
    P.k = ConformalConstants::make(cfg.n);
    P.data = assemble_data(P.metric, cfg.data);
    return P;
}

LinearSolveOptions linear_options(const SolverSettings& s) {
    LinearSolveOptions o;
    o.tol = s.linear_tol;
    o.method = SolverMethod::cg;
    return o;
}

PicardOptions picard_options(const SolverSettings& s) {
    PicardOptions o;
    o.tol = s.picard_tol;
    o.max_iter = s.max_iter;
    o.linear_tol = s.linear_tol;
    o.mp_slack = s.mp_slack;
    o.newton = s.newton;
    return o;
}

EigenOptions eigen_options(const RunConfig& cfg) {
    EigenOptions o;
    o.tol = cfg.solver.eigen_tol;
    o.seed = 0x5eed + cfg.seed;
    return o;
}

CoupledOptions coupled_options(const RunConfig& cfg) {
    CoupledOptions o;
    o.tol = cfg.solver.outer_tol;
    o.max_outer = cfg.solver.max_outer;
    o.picard = picard_options(cfg.solver);
    o.momentum_linear = linear_options(cfg.solver);
    o.eigen = eigen_options(cfg);
    return o;
}

BarrierPair build_barriers(const Problem& P, const DiscreteOperator& lap) {
    const BarrierContext ctx = make_context(P, lap);
    const BarrierSettings& bs = P.cfg.barriers;
    BarrierPair pair;
    pair.c_plus = bs.c_plus;
    pair.upper = build_supersolution(ctx, P.data, bs.c_plus, &pair.v);

    auto yamabe = [&] {
        YamabeOptions yo;
        yo.choice = bs.yamabe;
        yo.u0 = bs.yamabe_u0;
        yo.picard = picard_options(P.cfg.solver);
        yo.eigen = eigen_options(P.cfg);
        YamabeResult y = build_subsolution_yamabe(ctx, P.data, yo);
        pair.lower = std::move(y.phi);
        pair.u = std::move(y.u);
        pair.alpha = y.kappa;
        pair.cert.route = BarrierRoute::yamabe;
    };
    auto linear = [&] {
        SubsolutionResult s = build_subsolution_nonvacuum(ctx, P.data, bs.c_minus);
        pair.lower = std::move(s.phi);
        pair.u = std::move(s.u);
        pair.alpha = s.alpha;
        pair.c_minus = s.c_minus;
        pair.cert.route = BarrierRoute::linear_nonvacuum;
    };
    switch (bs.route) {
        case RouteChoice::linear_nonvacuum: linear(); break;
        case RouteChoice::yamabe: yamabe(); break;
        case RouteChoice::automatic:
            try {
                linear();
            } catch (const VacuumError&) {
                yamabe();
            }
            break;
    }
    for (std::size_t p = 0; p < pair.lower.size(); ++p) {
        if (!(pair.lower[p] > 0.0))
            throw HypothesisError("barriers: subsolution is not positive at node " + std::to_string(p),
                                  static_cast<long>(p));
        if (pair.lower[p] > pair.upper[p])
            throw HypothesisError("barriers: subsolution exceeds supersolution at node " + std::to_string(p),
                                  static_cast<long>(p));
    }
    pair.l = vmin(pair.lower);
    pair.m = vmax(pair.upper);
    return pair;
}

BarrierPair mms_barriers(const Problem& P, const ConformalData& forced, double k2_max, double eps2_extra) {
    const std::size_t N = P.metric.size();
    const std::vector<double> dummy(N, 1.0);
    const LichnerowiczProblem lo =
        make_lichnerowicz(P.k, P.curv.scalar, std::vector<double>(N, 0.0), forced, dummy, 0.0, 0.0);
    ConformalData hi_data = forced;
    for (double& e : hi_data.eps2) e += 2.0 * eps2_extra;
    const LichnerowiczProblem hi = make_lichnerowicz(P.k, P.curv.scalar, std::vector<double>(N, 2.0 * k2_max + 1.0),
                                                     hi_data, dummy, 0.0, 0.0);
    const auto bl = constant_barriers(lo);
    const auto bh = constant_barriers(hi);
    if (!bl || !bh) throw HypothesisError("mms: no constant barriers for the forced problem");
    BarrierPair pair;
    pair.l = bl->first;
    pair.m = std::max(bh->second, pair.l);
    pair.lower.assign(N, pair.l);
    pair.upper.assign(N, pair.m);
    pair.cert.route = BarrierRoute::linear_nonvacuum;
    return pair;
}

SolveOutcome run_solve(const Problem& P) {
    if (!P.chart.has_dirichlet()) throw ConfigError("solve: the chart needs Dirichlet axes");
    for (int a = 0; a < P.chart.dim(); ++a)
        if (P.chart.kind(a) != BoundaryKind::dirichlet) throw ConfigError("solve: every axis must be Dirichlet");
    const Domain full = Domain::full(P.chart);
    const DiscreteOperator lap = assemble_laplace_beltrami(P.metric, full);
    const BarrierContext ctx = make_context(P, lap);

    SolveOutcome out;
    out.barriers = build_barriers(P, lap);

    const int K = P.cfg.exhaustion_levels;
    std::optional<Exhaustion> ex;
    HypothesisOptions ho;
    ho.eigen = eigen_options(P.cfg);
    ho.p = P.cfg.barriers.lp;
    if (K > 1) {
        ex = build_exhaustion(P.chart, K, P.cfg.exhaustion_shrink);
        ho.compact = ex->mask(1);
    }
    out.hypotheses = check_hypotheses(ctx, P.data, ho);
    const double lambda1 = out.hypotheses.lambda1_conf;
    if (!(lambda1 > 0.0))
        throw SpectralError("solve: lambda1_conf = " + format_double(lambda1) + " is not positive");

    CertifyOptions co;
    co.c_cert = P.cfg.barriers.c_cert;
    co.p = P.cfg.barriers.lp;
    if (P.cfg.barriers.certify == CertifyMode::worst_case) {
        co.mode = CertifyMode::worst_case;
        out.worst_case = certify_barriers(out.barriers, ctx, P.data, lambda1, co);
    }

    CoupledContext cc{&P.metric, &P.curv, P.k};
    CoupledOptions opt = coupled_options(P.cfg);
    opt.lambda1_conf = lambda1;
    if (P.data.em)
        out.session = solve_coupled_em(cc, P.data, out.barriers, opt);
    else if (ex)
        out.session = solve_coupled_exhaustion(cc, *ex, P.data, out.barriers, opt);
    else
        out.session = solve_coupled_compact(cc, P.data, out.barriers, opt);

    const LevelRecord& L = out.session.last();
    const ConformalData eff = P.data.em ? with_em_sources(P.data, P.metric, L.f) : P.data;
    co.mode = CertifyMode::posteriori;
    out.posteriori = certify_barriers(out.barriers, ctx, eff, lambda1, co, &L.X);
    out.posteriori.route = out.barriers.cert.route;

    const InitialDataSet ids = reconstruct(P.metric, L.phi, L.X, L.f, eff, P.k);
    out.trace_defect = ids.trace_defect;
    if (P.chart.dim() == P.k.n) out.residuals = constraint_residuals(ids, L.phi, eff, P.k);
    return out;
}

MmsRun run_mms(const RunConfig& cfg, int nodes) {
    if (!cfg.mms.enabled) throw ConfigError("mms: the config has no mms section");
    Problem P = build_problem(cfg, nodes);
    const ContinuumMetric cm(cfg.metric, P.chart.dim());
    const MmsFields mf = mms_forcing(cm, P.chart, cfg.mms.targets, P.data, P.k);
    apply_mms(P.data, mf);

    const std::vector<double> k2 = k_tilde_squared(P.metric, conformal_killing_operator(P.metric, mf.X), P.data.U);
    double eps2_extra = 0.0;
    if (P.data.em && !mf.f.empty()) {
        const ConformalData aug = with_em_sources(P.data, P.metric, mf.f);
        for (std::size_t p = 0; p < aug.eps2.size(); ++p) eps2_extra = std::max(eps2_extra, aug.eps2[p] - P.data.eps2[p]);
    }
    const BarrierPair B = mms_barriers(P, P.data, vmax(k2), eps2_extra);

    CoupledContext cc{&P.metric, &P.curv, P.k};
    CoupledOptions opt = coupled_options(cfg);
    MmsRun r;
    r.session = P.data.em && !mf.f.empty() ? solve_coupled_em(cc, P.data, B, opt) : solve_coupled_compact(cc, P.data, B, opt);
    const LevelRecord& L = r.session.last();
    for (std::size_t p = 0; p < L.phi.size(); ++p) {
        r.err_phi = std::max(r.err_phi, std::abs(L.phi[p] - mf.phi[p]));
        for (std::size_t i = 0; i < 3; ++i) r.err_X = std::max(r.err_X, std::abs(L.X[p][i] - mf.X[p][i]));
        if (!L.f.empty()) r.err_f = std::max(r.err_f, std::abs(L.f[p] - mf.f[p]));
    }
    const DiscreteOperator lap = assemble_laplace_beltrami(P.metric, Domain::full(P.chart));
    const BarrierContext ctx = make_context(P, lap);
    CertifyOptions co;
    co.mode = CertifyMode::posteriori;
    const ConformalData eff = P.data.em && !L.f.empty() ? with_em_sources(P.data, P.metric, L.f) : P.data;
    r.posteriori = certify_barriers(B, ctx, eff, r.session.lambda1_conf, co, &L.X);
    return r;
}

void write_manifest(const RunConfig& cfg, const std::string& out, const std::string& command,
                    const std::vector<std::string>& artifacts) {
    Report r;
    r.add("tool_version", std::string(kToolVersion));
    r.add("command", command);
    r.add("config_sha256", cfg.hash);
    r.add("seed", static_cast<long long>(cfg.seed));
    r.add("linear_tol", cfg.solver.linear_tol);
    r.add("picard_tol", cfg.solver.picard_tol);
    r.add("outer_tol", cfg.solver.outer_tol);
    r.add("eigen_tol", cfg.solver.eigen_tol);
    r.add("mp_slack", cfg.solver.mp_slack);
    r.add("max_iter", cfg.solver.max_iter);
    r.add("max_outer", cfg.solver.max_outer);
    for (const std::string& a : artifacts) r.add("artifact", a);
    r.write(join(out, "manifest.txt"));
}

Report solve_command(const RunConfig& cfg, const std::string& out) {
    const Problem P = build_problem(cfg);
    const SolveOutcome o = run_solve(P);
    ensure_directory(out);
    const LevelRecord& L = o.session.last();
    std::vector<std::string> files = {"phi.csv", "X.csv", "phi_lower.csv", "phi_upper.csv", "picard_trace.csv",
                                      "session.txt", "summary.txt"};
    write_scalar_csv(join(out, "phi.csv"), P.chart, "phi", L.phi);
    write_vector_csv(join(out, "X.csv"), P.chart, "X", L.X);
    if (!L.f.empty()) {
        write_scalar_csv(join(out, "f.csv"), P.chart, "f", L.f);
        files.push_back("f.csv");
    }
    write_scalar_csv(join(out, "phi_lower.csv"), P.chart, "phi_lower", o.barriers.lower);
    write_scalar_csv(join(out, "phi_upper.csv"), P.chart, "phi_upper", o.barriers.upper);
    write_text(join(out, "picard_trace.csv"), picard_csv(o.session));
    write_text(join(out, "session.txt"), session_text(o.session));

    Report r;
    r.add("route", route_name(o.barriers.cert));
    r.add("barrier.l", o.barriers.l);
    r.add("barrier.m", o.barriers.m);
    r.add("barrier.alpha", o.barriers.alpha);
    r.add("converged", L.converged);
    r.add("outer_iterations", L.outer.size());
    r.add("rho", L.rho);
    r.add("lambda1_conf", o.session.lambda1_conf);
    r.add("phi.min", vmin(L.phi));
    r.add("phi.max", vmax(L.phi));
    r.add("trace_defect", o.trace_defect);
    if (cfg.barriers.certify == CertifyMode::worst_case) add_certificate(r, "worst_case", o.worst_case);
    add_certificate(r, "posteriori", o.posteriori);
    add_hypotheses(r, o.hypotheses);
    if (o.residuals) {
        r.add("residual.hamiltonian.linf", o.residuals->hamiltonian_norm.linf);
        r.add("residual.hamiltonian.l2", o.residuals->hamiltonian_norm.l2);
        r.add("residual.momentum.linf", o.residuals->momentum_norm.linf);
        r.add("residual.momentum.l2", o.residuals->momentum_norm.l2);
        if (!o.residuals->em.empty()) {
            r.add("residual.em.linf", o.residuals->em_norm.linf);
            r.add("residual.em.l2", o.residuals->em_norm.l2);
        }
    }
    for (std::size_t k = 0; k < o.session.cauchy.size(); ++k)
        r.add("cauchy." + std::to_string(k + 1), o.session.cauchy[k]);
    r.write(join(out, "summary.txt"));
    write_manifest(cfg, out, "solve", files);
    return r;
}

Report certify_command(const RunConfig& cfg, const std::string& out) {
    const Problem P = build_problem(cfg);
    const DiscreteOperator lap = assemble_laplace_beltrami(P.metric, Domain::full(P.chart));
    const BarrierContext ctx = make_context(P, lap);
    const BarrierPair B = build_barriers(P, lap);
    HypothesisOptions ho;
    ho.eigen = eigen_options(cfg);
    ho.p = cfg.barriers.lp;
    if (cfg.exhaustion_levels > 1) ho.compact = build_exhaustion(P.chart, cfg.exhaustion_levels, cfg.exhaustion_shrink).mask(1);
    const HypothesisReport h = check_hypotheses(ctx, P.data, ho);

    Report r;
    r.add("route", route_name(B.cert));
    r.add("barrier.l", B.l);
    r.add("barrier.m", B.m);
    r.add("barrier.alpha", B.alpha);
    add_hypotheses(r, h);
    ensure_directory(out);
    std::vector<std::string> files = {"certificate.txt", "phi_lower.csv", "phi_upper.csv"};
    write_scalar_csv(join(out, "phi_lower.csv"), P.chart, "phi_lower", B.lower);
    write_scalar_csv(join(out, "phi_upper.csv"), P.chart, "phi_upper", B.upper);
    if (h.lambda1_conf > 0.0) {
        CertifyOptions co;
        co.mode = CertifyMode::worst_case;
        co.c_cert = cfg.barriers.c_cert;
        co.p = cfg.barriers.lp;
        const Certificate c = certify_barriers(B, ctx, P.data, h.lambda1_conf, co);
        add_certificate(r, "worst_case", c);
        std::vector<double> k2 = k_tilde_squared(P.metric, {}, P.data.U);
        for (double& v : k2) v = 2.0 * (c.m_bound + v);
        write_scalar_csv(join(out, "margin_upper.csv"), P.chart, "H_phi_upper",
                         scatter_dofs(lap, lichnerowicz_operator(ctx, P.data, k2, B.upper)));
        write_scalar_csv(join(out, "margin_lower.csv"), P.chart, "H_phi_lower",
                         scatter_dofs(lap, lichnerowicz_operator(ctx, P.data, std::vector<double>(k2.size(), 0.0),
                                                                 B.lower)));
        files.push_back("margin_upper.csv");
        files.push_back("margin_lower.csv");
    } else {
        r.add("worst_case.certified", false);
        r.add("worst_case.reason", std::string("lambda1_conf is not positive"));
    }
    r.write(join(out, "certificate.txt"));
    write_manifest(cfg, out, "certify", files);
    return r;
}

Report eigen_command(const RunConfig& cfg) {
    const Problem P = build_problem(cfg);
    const EigenOptions eo = eigen_options(cfg);
    const Domain full = Domain::full(P.chart);
    Report r;
    const std::vector<double> zero(P.metric.size(), 0.0);
    std::vector<double> yam(P.metric.size());
    const double c_n = P.k.c_n().to_double();
    for (std::size_t p = 0; p < yam.size(); ++p) yam[p] = c_n * P.curv.scalar[p];
    const SpectralEstimate lap = lambda1_schrodinger(P.metric, zero, full, eo);
    r.add("lambda1_laplace", lap.lambda);
    r.add("lambda1_laplace.residual", lap.residual);
    const SpectralEstimate y = lambda1_schrodinger(P.metric, yam, full, eo);
    r.add("lambda1_yamabe", y.lambda);
    if (P.chart.has_dirichlet()) {
        const SpectralEstimate c = lambda1_conf(P.metric, full, eo);
        r.add("lambda1_conf", c.lambda);
        r.add("lambda1_conf.residual", c.residual);
        r.add("lambda1_conf.iterations", c.iterations);
    }
    return r;
}

Report verify_command(const RunConfig& cfg, const std::string& fields_dir) {
    const Problem P = build_problem(cfg);
    const std::vector<double> phi = dump_scalar(read_field_csv(join(fields_dir, "phi.csv")), P.chart);
    const std::vector<Vec3> X = dump_vector(read_field_csv(join(fields_dir, "X.csv")), P.chart);
    std::vector<double> f;
    if (P.data.em) f = dump_scalar(read_field_csv(join(fields_dir, "f.csv")), P.chart);
    const ConformalData eff = P.data.em ? with_em_sources(P.data, P.metric, f) : P.data;
    const InitialDataSet ids = reconstruct(P.metric, phi, X, f, eff, P.k);
    const ResidualReport res = constraint_residuals(ids, phi, eff, P.k);
    Report r;
    r.add("trace_defect", ids.trace_defect);
    r.add("measured_nodes", res.measured);
    r.add("residual.hamiltonian.linf", res.hamiltonian_norm.linf);
    r.add("residual.hamiltonian.l2", res.hamiltonian_norm.l2);
    r.add("residual.momentum.linf", res.momentum_norm.linf);
    r.add("residual.momentum.l2", res.momentum_norm.l2);
    if (!res.em.empty()) {
        r.add("residual.em.linf", res.em_norm.linf);
        r.add("residual.em.l2", res.em_norm.l2);
    }
    return r;
}

Report mms_command(const RunConfig& cfg, const std::string& out) {
    std::vector<int> res = cfg.mms.resolutions;
    if (res.empty()) res = {9, 17, 33};
    const bool em = cfg.data.has_em && cfg.mms.targets.f.has_value();
    std::vector<std::string> fields = {"phi", "X"};
    if (em) fields.push_back("f");
    const ConvergenceTable t = convergence_study(
        [&](int n) {
            const MmsRun m = run_mms(cfg, n);
            std::vector<double> e = {m.err_phi, m.err_X};
            if (em) e.push_back(m.err_f);
            return e;
        },
        res, fields);
    ensure_directory(out);
    std::ostringstream os;
    os << "nodes";
    for (const auto& f : fields) os << ",err_" << f << ",order_" << f;
    os << '\n';
    Report r;
    for (std::size_t i = 0; i < res.size(); ++i) {
        os << res[i];
        for (std::size_t f = 0; f < fields.size(); ++f) {
            os << ',' << format_double(t.errors[i][f]) << ',';
            if (i > 0) os << format_double(t.orders[i - 1][f]);
            r.add("err_" + fields[f] + "." + std::to_string(res[i]), t.errors[i][f]);
            if (i > 0) r.add("order_" + fields[f] + "." + std::to_string(res[i]), t.orders[i - 1][f]);
        }
        os << '\n';
    }
    write_text(join(out, "mms_orders.csv"), os.str());
    r.write(join(out, "mms.txt"));
    write_manifest(cfg, out, "mms", {"mms_orders.csv", "mms.txt"});
    return r;
}

Report sweep_command(const RunConfig& cfg, const std::string& out) {
    const Problem P = build_problem(cfg);
    const DiscreteOperator lap = assemble_laplace_beltrami(P.metric, Domain::full(P.chart));
    const BarrierContext ctx = make_context(P, lap);
    const SweepResult s = sweep_tau0(ctx, P.data, cfg.sweep.lo, cfg.sweep.hi, cfg.sweep.steps, cfg.sweep.c_target,
                                     cfg.barriers.lp);
    std::ostringstream os;
    os << "tau0,min_C,pass\n";
    for (const SweepRow& row : s.rows)
        os << format_double(row.tau0) << ',' << format_double(row.min_C) << ',' << (row.pass ? 1 : 0) << '\n';
    ensure_directory(out);
    write_text(join(out, "sweep_tau0.csv"), os.str());
    Report r;
    r.add("threshold", s.threshold);
    r.add("monotone", s.monotone);
    r.add("rows", s.rows.size());
    r.write(join(out, "sweep.txt"));
    write_manifest(cfg, out, "sweep-tau0", {"sweep_tau0.csv", "sweep.txt"});
    return r;
}

}  // namespace cforge

#include "doctest.h"
#include "support.hpp"

#include "cforge/barriers.hpp"
#include "cforge/errors.hpp"

using namespace cforge;
using namespace cforge::test;

namespace {

struct Setup {
    GridChart chart;
    MetricField metric;
    CurvaturePack curv;
    DiscreteOperator lap;
    BarrierContext ctx;

    explicit Setup(GridChart c, const char* psi = "1") : chart(std::move(c)) {
        metric = conformal(chart, psi);
        curv = curvature(metric);
        lap = assemble_laplace_beltrami(metric, Domain::full(chart));
        ctx.metric = &metric;
        ctx.curvature = &curv;
        ctx.laplacian = &lap;
        ctx.constants = ConformalConstants::make(3);
    }

    ConformalData data(const char* tau, const char* eps2 = "0", const char* eps3 = "0", const char* eps1 = "0") const {
        DataSpec s;
        s.tau = Expression::parse(tau);
        s.eps1 = Expression::parse(eps1);
        s.eps2 = Expression::parse(eps2);
        s.eps3 = Expression::parse(eps3);
        return assemble_data(metric, s);
    }
};

double sup(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
double inf_(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

TEST_CASE("supersolution for constant a against a dense solve") {
    Setup S(box(3, 7));
    const ConformalData D = S.data("3");
    std::vector<double> v;
    const std::vector<double> phi = build_supersolution(S.ctx, D, 0.0, &v);
    const double a = S.ctx.constants.b_n().to_double() * 9.0;
    const std::size_t n = S.lap.unknowns();
    const Eigen::MatrixXd A = dense(shifted_stiffness(S.lap, std::vector<double>(n, a)));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) b[static_cast<Eigen::Index>(i)] = S.lap.mass[i] * a;
    const Eigen::VectorXd ref = A.ldlt().solve(b);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = S.lap.domain.dof_nodes()[i];
        CHECK(v[p] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).epsilon(1e-9));
        CHECK(v[p] > 0.0);
        CHECK(v[p] < 1.0);
    }
    CHECK(inf_(phi) >= 1.0);
    CHECK(sup(phi) <= 2.0);
}

TEST_CASE("supersolution cap with c_plus = 1 is exactly 2") {
    Setup S(box(3, 7));
    const std::vector<double> phi = build_supersolution(S.ctx, S.data("2 + 0.5*x"), 1.0);
    CHECK(sup(phi) <= 2.0 + 1e-8);
    CHECK(sup(phi) == doctest::Approx(2.0));
}

TEST_CASE("supersolution cap on random configurations") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Setup S(box(3, 7));
        const double t0 = 0.5 + 3 * ud(rng), t1 = ud(rng);
        const std::string tau = std::to_string(t0) + " + " + std::to_string(t1) + "*sin(3*x*y)";
        const double cp = 2 * ud(rng);
        std::vector<double> v;
        build_supersolution(S.ctx, S.data(tau.c_str()), cp, &v);
        // Λ₊ = a, so sup Λ₊/a = 1.
        for (double x : v) CHECK(x <= std::max(1.0, cp) + 1e-8);
    }
}

TEST_CASE("non-positive supersolution coefficient names the node") {
    Setup S(box(3, 5));
    try {
        build_supersolution(S.ctx, S.data("x - 0.5"));
        FAIL("expected HypothesisError");
    } catch (const HypothesisError& e) {
        REQUIRE(e.node() >= 0);
        CHECK(S.chart.coord(static_cast<std::size_t>(e.node()))[0] == doctest::Approx(0.5));
        CHECK(e.code() == ExitCode::hypothesis);
    }
}

TEST_CASE("non-vacuum subsolution") {
    Setup S(box(3, 9));
    const ConformalData D = S.data("2", "0.3");
    const SubsolutionResult r = build_subsolution_nonvacuum(S.ctx, D);
    CHECK(r.alpha > 0.0);
    CHECK(inf_(r.u) > 0.0);
    CHECK(inf_(r.phi) > 0.0);
    CHECK(sup(r.phi) <= 1.0);
    // Λ₋ = ½(ε₂+ε₃) makes the sign condition α ≤ 4c_n.
    const double c_n = S.ctx.constants.c_n().to_double();
    CHECK(r.alpha <= 4 * c_n);
    const std::vector<double> lam = subsolution_source(S.ctx.constants, D);
    for (std::size_t p = 0; p < lam.size(); ++p) CHECK(2 * c_n * D.eps2[p] >= r.alpha * lam[p]);
    const std::vector<double> up = build_supersolution(S.ctx, D);
    for (std::size_t p = 0; p < up.size(); ++p) CHECK(r.phi[p] <= up[p]);

    CHECK_THROWS_AS(build_subsolution_nonvacuum(S.ctx, S.data("2")), VacuumError);
}

TEST_CASE("paired linear solves are ordered") {
    Setup S(box(3, 9), "1 + 0.1*x*y");
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const std::size_t n = S.lap.unknowns();
    for (int t = 0; t < 10; ++t) {
        std::vector<double> a(n), lm(n), lp(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 0.2 + ud(rng);
            lm[i] = ud(rng);
            lp[i] = lm[i] + ud(rng);
        }
        const double cm = ud(rng), cp = cm + ud(rng);
        std::vector<double> fm(n), fp(n);
        for (std::size_t i = 0; i < n; ++i) {
            fm[i] = -lm[i];
            fp[i] = -lp[i];
        }
        LinearSolveOptions o{1e-13};
        const auto u = solve_dirichlet(S.lap, a, fm, std::vector<double>(S.chart.node_count(), cm), o);
        const auto v = solve_dirichlet(S.lap, a, fp, std::vector<double>(S.chart.node_count(), cp), o);
        for (std::size_t p = 0; p < u.size(); ++p) {
            CHECK(u[p] > 0.0);
            CHECK(u[p] <= v[p] + 1e-10);
        }
    }
}

TEST_CASE("Yamabe auxiliary problem with constant tau") {
    Setup S(box(3, 9));
    const ConformalData D = S.data("1.5");
    YamabeOptions o;
    o.u0 = 0.5;
    const YamabeResult r = solve_yamabe_auxiliary(S.ctx, D, o);
    // Δu = c_n r_n t² u^5 with u = u₀ on the boundary: the solution stays below u₀ and above 0.
    CHECK(inf_(r.u) > 0.0);
    CHECK(sup(r.u) <= 0.5 + 1e-10);
    CHECK(r.u_hi >= sup(r.u) - 1e-10);
    CHECK(r.trace.converged);
    CHECK(inf_(r.u) < 0.5);
    CHECK(r.u_hi == 0.5);

    CHECK_THROWS_AS(build_subsolution_yamabe(S.ctx, S.data("0"), o), HypothesisError);
    // R = 0 leaves λ₁(M) = λ₁(-Δ) > 0.
    CHECK_THROWS_AS(build_subsolution_yamabe(S.ctx, D, o), HypothesisError);
}

TEST_CASE("Yamabe subsolution from a strong eps3 source") {
    Setup S(box(3, 9));
    const ConformalData D = S.data("1.5", "0", "200");
    YamabeOptions o;
    o.choice = YamabeChoice::eps3_tau;
    o.u0 = 0.5;
    const YamabeResult r = build_subsolution_yamabe(S.ctx, D, o);
    CHECK(r.lambda_m < 0.0);
    CHECK(std::isinf(r.lambda_b0));
    // Constant upper barrier (2c_n ε₃ / (b_n τ²))^(1/4).
    const double c_n = S.ctx.constants.c_n().to_double(), b_n = S.ctx.constants.b_n().to_double();
    CHECK(r.u_hi == doctest::Approx(std::pow(2 * c_n * 200 / (b_n * 2.25), 0.25)));
    CHECK(sup(r.u) <= r.u_hi + 1e-10);
    CHECK(r.kappa == doctest::Approx(0.99 * std::min(1.0, 1.0 / sup(r.u))));
    CHECK(sup(r.phi) <= 0.99 + 1e-12);
    for (std::size_t q : S.lap.domain.dof_nodes()) CHECK(r.phi[q] == doctest::Approx(r.kappa * r.u[q]));
    // The scaled solution is a subsolution of the full equation with K = 0.
    for (double h : lichnerowicz_operator(S.ctx, D, std::vector<double>(D.tau.size(), 0.0), r.phi)) CHECK(h >= -1e-6);

    YamabeOptions rt = o;
    rt.choice = YamabeChoice::R_tau;
    CHECK_THROWS_AS(build_subsolution_yamabe(S.ctx, D, rt), HypothesisError);
}

TEST_CASE("worst-case certificate") {
    Setup S(box(3, 9));
    const ConformalData D = S.data("2", "0.3", "0.1", "0.05");
    BarrierPair B;
    B.upper = build_supersolution(S.ctx, D);
    B.lower = build_subsolution_nonvacuum(S.ctx, D).phi;
    const Certificate c = certify_barriers(B, S.ctx, D, 30.0, CertifyOptions{});
    CHECK(c.m_bound == 0.0);
    CHECK(c.certified);
    CHECK(c.super_margin <= 1e-6);
    CHECK(c.sub_margin >= -1e-6);

    const ConformalData heavy = S.data("2", "0.3", "0.1", "5e4");
    const Certificate h = certify_barriers(B, S.ctx, heavy, 30.0, CertifyOptions{});
    CHECK_FALSE(h.certified);
    CHECK(h.super_margin > 0.0);

    CHECK_THROWS_AS(certify_barriers(B, S.ctx, D, 0.0, CertifyOptions{}), SpectralError);
    CertifyOptions post;
    post.mode = CertifyMode::posteriori;
    CHECK_THROWS_AS(certify_barriers(B, S.ctx, D, 30.0, post), PreconditionError);
}

TEST_CASE("hypothesis report") {
    Setup S(box(3, 7));
    HypothesisOptions o;
    o.spectral = false;
    SUBCASE("CMC vacuum") {
        const HypothesisReport r = check_hypotheses(S.ctx, S.data("1"), o);
        CHECK(r.a0 == doctest::Approx(S.ctx.constants.b_n().to_double()));
        CHECK(r.min_C == 0.0);
        CHECK_FALSE(r.eps_positive);
    }
    SUBCASE("tau with a zero set") {
        const HypothesisReport r = check_hypotheses(S.ctx, S.data("x - 0.5", "0.1"), o);
        CHECK(std::isinf(r.min_C));
        CHECK_FALSE(r.tau_zero_nodes.empty());
        for (std::size_t p : r.tau_zero_nodes) CHECK(S.chart.coord(p)[0] == doctest::Approx(0.5));
    }
    SUBCASE("crafted data against a brute-force maximum") {
        const ConformalData D = S.data("1 + x*y", "0.2 + 0.1*z", "0.05*x", "0.3*y");
        const HypothesisReport r = check_hypotheses(S.ctx, D, o);
        double brute = 0.0;
        for (std::size_t p = 0; p < D.tau.size(); ++p) brute = std::max(brute, r.smallness_lhs[p] / (D.tau[p] * D.tau[p]));
        CHECK(r.min_C == brute);
        // |d(xy)| = sqrt(x² + y²); nodal quadrature with the default exponent 2n = 6.
        double s2 = 0.0, s6 = 0.0;
        const double cell = S.chart.cell_volume();
        for (std::size_t p = 0; p < D.tau.size(); ++p) {
            const Vec3 x = S.chart.coord(p);
            const double m2 = x[0] * x[0] + x[1] * x[1];
            s2 += cell * m2;
            s6 += cell * m2 * m2 * m2;
        }
        const double norm = std::max(std::sqrt(s2), std::pow(s6, 1.0 / 6.0));
        for (std::size_t p = 0; p < D.tau.size(); ++p)
            CHECK(r.smallness_lhs[p] == doctest::Approx(norm + D.eps1[p] + D.eps2[p] + D.eps3[p]).epsilon(1e-10));
    }
}

TEST_CASE("spectral hypotheses for the Yamabe route") {
    Setup S(box(3, 7));
    HypothesisOptions o;
    const HypothesisReport r = check_hypotheses(S.ctx, S.data("2", "0.1"), o);
    CHECK(r.lambda1_conf > 0.0);
    CHECK(std::isinf(r.lambda_b0));
    CHECK(r.lambda_m > 0.0);
    CHECK_FALSE(r.yamabe_ok);
}

TEST_CASE("tau0 sweep") {
    Setup S(box(3, 7));
    SUBCASE("no perturbation passes everywhere") {
        const SweepResult r = sweep_tau0(S.ctx, S.data("0"), 0.5, 4.0, 8, 1.0);
        for (const SweepRow& row : r.rows) {
            CHECK(row.min_C == 0.0);
            CHECK(row.pass);
        }
        CHECK(r.threshold == 0.5);
    }
    SUBCASE("fixed sources decay like 1/tau0^2 and the threshold matches bisection") {
        const ConformalData D = S.data("0.1*sin(x)", "0.5", "0.2", "0.3");
        const SweepResult r = sweep_tau0(S.ctx, D, 0.2, 5.0, 25, 0.25);
        CHECK(r.monotone);
        for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].min_C < r.rows[i - 1].min_C);
        CHECK(r.rows.back().min_C * 25.0 == doctest::Approx(r.rows.front().min_C * 0.04).epsilon(1e-12));
        std::size_t lo = 0, hi = r.rows.size() - 1;
        REQUIRE(r.rows[hi].pass);
        REQUIRE_FALSE(r.rows[lo].pass);
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (r.rows[mid].pass ? hi : lo) = mid;
        }
        CHECK(r.threshold == r.rows[hi].tau0);
    }
    CHECK_THROWS_AS(sweep_tau0(S.ctx, S.data("0"), 0.0, 1.0, 4, 1.0), ConfigError);
    CHECK_THROWS_AS(sweep_tau0(S.ctx, S.data("0"), 2.0, 1.0, 4, 1.0), ConfigError);
}

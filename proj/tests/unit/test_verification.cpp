#include "doctest.h"
#include "support.hpp"

#include "cforge/errors.hpp"
#include "cforge/verification.hpp"

using namespace cforge;
using namespace cforge::test;

namespace {

DataSpec spec(const char* tau, const char* eps2 = "0") {
    DataSpec s;
    s.tau = Expression::parse(tau);
    s.eps1 = Expression::constant(0.0);
    s.eps2 = Expression::parse(eps2);
    s.eps3 = Expression::constant(0.0);
    return s;
}

MetricSpec flat_spec() {
    return MetricSpec{};
}

/// R of ψ⁴δ at every node from the closed form −8ψ⁻⁵Δψ for ψ = 1 + 0.1 sin πx sin πy sin πz.
double curvature_error(int nodes) {
    const GridChart c = box(3, nodes);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    const ConformalData D = assemble_data(g, spec("0"));
    std::vector<double> phi(c.node_count());
    std::vector<double> R(c.node_count());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const Vec3 x = c.coord(p);
        const double s = std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]) * std::sin(M_PI * x[2]);
        phi[p] = 1.0 + 0.1 * s;
        R[p] = -8.0 * std::pow(phi[p], -5.0) * (-3.0 * M_PI * M_PI * 0.1 * s);
    }
    const InitialDataSet ids = reconstruct(g, phi, {}, {}, D, k);
    ResidualOptions o;
    o.boundary_layer = 2;
    const ResidualReport r = constraint_residuals(ids, phi, D, k, o);
    double e = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p)
        if (r.hamiltonian[p] != 0.0) e = std::max(e, std::abs(r.hamiltonian[p] - R[p]));
    return e;
}

}  // namespace

TEST_CASE("trivial reconstruction") {
    const GridChart c = box(3, 5);
    const MetricField g = conformal(c, "1 + 0.1*x");
    const ConformalConstants k = ConformalConstants::make(3);
    const ConformalData D = assemble_data(g, spec("1.5"));
    const std::vector<double> one(c.node_count(), 1.0);
    const InitialDataSet ids = reconstruct(g, one, {}, {}, D, k);
    for (std::size_t p = 0; p < c.node_count(); ++p)
        for (std::size_t e = 0; e < 9; ++e) {
            CHECK(ids.g.g(p)[e] == g.g(p)[e]);
            CHECK(ids.K[p][e] == doctest::Approx(0.5 * g.g(p)[e]).epsilon(1e-15));
        }
    CHECK(ids.trace_defect <= 1e-14);
    CHECK(ids.E.empty());
}

TEST_CASE("constant conformal factor scales g and K") {
    const GridChart c = box(3, 5);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    DataSpec s = spec("0.7 + 0.2*y");
    s.U = {Expression::constant(0.3), Expression::constant(0.1), Expression::constant(0.0),
           Expression::constant(-0.1), Expression::constant(0.0), Expression::constant(-0.2)};
    const ConformalData D = assemble_data(g, s);
    const double cf = 1.7;
    const InitialDataSet ids = reconstruct(g, std::vector<double>(c.node_count(), cf), {}, {}, D, k);
    for (std::size_t p = 0; p < c.node_count(); ++p)
        for (std::size_t e = 0; e < 9; ++e) {
            CHECK(ids.g.g(p)[e] == doctest::Approx(std::pow(cf, 4) * g.g(p)[e]).epsilon(1e-14));
            CHECK(ids.K[p][e] ==
                  doctest::Approx(D.U[p][e] / (cf * cf) + D.tau[p] / 3.0 * ids.g.g(p)[e]).epsilon(1e-14));
        }
    CHECK(ids.trace_defect <= 1e-13);
    std::vector<double> bad(c.node_count(), 1.0);
    bad[3] = 0.0;
    CHECK_THROWS_AS(reconstruct(g, bad, {}, {}, D, k), DomainError);
}

TEST_CASE("flat vacuum data satisfy the constraints") {
    const GridChart c = box(3, 9);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    const ConformalData D = assemble_data(g, spec("0"));
    const std::vector<double> one(c.node_count(), 1.0);
    const ResidualReport r = constraint_residuals(reconstruct(g, one, {}, {}, D, k), one, D, k);
    CHECK(r.hamiltonian_norm.linf <= 1e-10);
    CHECK(r.momentum_norm.linf <= 1e-10);
    CHECK(r.measured == 7u * 7u * 7u);
    ResidualOptions o;
    o.boundary_layer = 2;
    CHECK(constraint_residuals(reconstruct(g, one, {}, {}, D, k), one, D, k, o).measured == 125u);
}

TEST_CASE("umbilic slice and matter sources") {
    const GridChart c = box(3, 7);
    const MetricField g = conformal(c, "1 + 0.05*x*y");
    const ConformalConstants k = ConformalConstants::make(3);
    const double tau = 1.2, e2 = 0.4;
    const ConformalData D0 = assemble_data(g, spec("1.2"));
    const ConformalData D1 = assemble_data(g, spec("1.2", "0.4"));
    std::vector<double> phi(c.node_count());
    for (std::size_t p = 0; p < phi.size(); ++p) phi[p] = 1.0 + 0.1 * c.coord(p)[2];
    const InitialDataSet ids = reconstruct(g, phi, {}, {}, D0, k);
    const ResidualReport a = constraint_residuals(ids, phi, D0, k);
    const ResidualReport b = constraint_residuals(ids, phi, D1, k);
    for (std::size_t p = 0; p < phi.size(); ++p) {
        if (a.hamiltonian[p] == 0.0) continue;
        // K = (τ/3)g gives τ² − |K|² = 2τ²/3 on top of R.
        const double R = a.hamiltonian[p] - 2.0 * tau * tau / 3.0;
        CHECK(b.hamiltonian[p] == doctest::Approx(R + 2.0 * tau * tau / 3.0 - 2.0 * e2 * std::pow(phi[p], -8.0)));
    }
    // div(τg/3) = 0 once the Christoffels come from the same g.
    CHECK(a.momentum_norm.linf <= 1e-9);
}

TEST_CASE("reconstructed curvature converges at second order") {
    const double e1 = curvature_error(9), e2 = curvature_error(17);
    // Amplitude of R is 2.4π².
    CHECK(e2 < 0.02 * 2.4 * M_PI * M_PI);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("physical sources") {
    const ConformalConstants k = ConformalConstants::make(3);
    ConformalData D;
    D.eps1 = {0.5};
    D.eps2 = {2.0};
    D.eps3 = {3.0};
    D.omega1 = {Vec3{1.0, 0.0, -1.0}};
    D.omega2 = {Vec3{0.0, 64.0, 1.0}};
    const std::vector<double> phi{2.0};
    const double e = physical_energy(phi, D, k)[0];
    CHECK(e == doctest::Approx(0.5 + 2.0 / 256.0 + 3.0 / 256.0));
    const Vec3 J = physical_momentum(phi, D, k)[0];
    CHECK(J[0] == doctest::Approx(4.0));
    CHECK(J[1] == doctest::Approx(-1.0));
    CHECK(J[2] == doctest::Approx(-4.0 - 1.0 / 64.0));
}

TEST_CASE("manufactured forcing vanishes on an exact solution") {
    const GridChart c = box(3, 5);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    // b_n τ² = 2c_n ε₂ at τ = 1 when ε₂ = 1/3, so φ = 1 and X = 0 solve the system.
    const ConformalData D = assemble_data(g, spec("1", "1/3"));
    const MmsFields m = mms_forcing(ContinuumMetric(flat_spec(), 3), c, MmsTargets{}, D, k);
    for (std::size_t p = 0; p < c.node_count(); ++p) {
        CHECK(std::abs(m.force_phi[p]) <= 1e-15);
        for (double v : m.force_X[p]) CHECK(v == 0.0);
        CHECK(m.phi[p] == 1.0);
    }
    ConformalData F = D;
    apply_mms(F, m);
    CHECK(F.bc_u == m.phi);
    CHECK(F.force_phi == m.force_phi);
    CHECK(F.force_f.empty());

    MmsTargets t;
    t.phi = Expression::parse("0.5 - x");
    CHECK_THROWS_AS(mms_forcing(ContinuumMetric(flat_spec(), 3), c, t, D, k), DomainError);
}

TEST_CASE("manufactured forcing for a quadratic conformal factor") {
    const GridChart c = box(3, 5);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    const ConformalData D = assemble_data(g, spec("0"));
    MmsTargets t;
    t.phi = Expression::parse("1 + x*x");
    const MmsFields m = mms_forcing(ContinuumMetric(flat_spec(), 3), c, t, D, k);
    // Δφ = 2 and h = 0 with no sources.
    for (std::size_t p = 0; p < c.node_count(); ++p) CHECK(m.force_phi[p] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("convergence study") {
    const auto run = [](int n) {
        const double h = 1.0 / (n - 1);
        return std::vector<double>{3.0 * h * h, 0.5 * h};
    };
    const ConvergenceTable t = convergence_study(run, {9, 17, 33}, {"a", "b"});
    REQUIRE(t.orders.size() == 2);
    for (const auto& o : t.orders) {
        CHECK(o[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(o[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto prun = [](int n) { return std::vector<double>{1.0 / (n * n)}; };
    CHECK(convergence_study(prun, {8, 16}, {"a"}, true).orders[0][0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(convergence_study(run, {9}, {"a", "b"}), PreconditionError);
    CHECK_THROWS_AS(convergence_study(run, {9, 9}, {"a", "b"}), PreconditionError);
    CHECK_THROWS_AS(convergence_study(run, {9, 17}, {"a"}), ConfigError);
}

TEST_CASE("electric field of a linear potential is divergence free") {
    const GridChart c = box(3, 7);
    const MetricField g = flat(c);
    const ConformalConstants k = ConformalConstants::make(3);
    DataSpec s = spec("1");
    s.has_em = true;
    s.q = Expression::constant(0.0);
    s.V = {Expression::constant(0.0), Expression::constant(0.5), Expression::constant(0.0)};
    s.F = {Expression::constant(0.0), Expression::constant(0.0), Expression::constant(0.0)};
    const ConformalData D = assemble_data(g, s);
    std::vector<double> f(c.node_count());
    for (std::size_t p = 0; p < f.size(); ++p) f[p] = c.coord(p)[0] - c.coord(p)[2];
    const std::vector<double> one(c.node_count(), 1.0);
    const InitialDataSet ids = reconstruct(g, one, {}, f, D, k);
    REQUIRE(ids.E.size() == c.node_count());
    for (const Vec3& e : ids.E) {
        CHECK(e[0] == doctest::Approx(1.0));
        CHECK(e[1] == doctest::Approx(0.5));
        CHECK(e[2] == doctest::Approx(-1.0));
    }
    const ResidualReport r = constraint_residuals(ids, one, D, k);
    CHECK(r.em_norm.linf <= 1e-12);
}

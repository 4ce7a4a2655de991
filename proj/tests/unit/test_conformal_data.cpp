#include "doctest.h"
#include "support.hpp"

#include "cforge/conformal_data.hpp"
#include "cforge/errors.hpp"

using namespace cforge;
using namespace cforge::test;

TEST_CASE("dimensional constants") {
    for (int n = 3; n <= 12; ++n) {
        const ConformalConstants k = ConformalConstants::make(n);
        CHECK(k.a_n() * k.c_n() == Rational(1));
        CHECK(k.b_n() == k.c_n() * k.r_n());
        CHECK(k.critical() == Rational(n + 2, n - 2));
    }
    const ConformalConstants k3 = ConformalConstants::make(3);
    CHECK(k3.a_n() == Rational(8));
    CHECK(k3.c_n() == Rational(1, 8));
    CHECK(k3.b_n() == Rational(1, 12));
    CHECK(k3.tau_power() == Rational(6));
    CHECK(k3.k_power() == Rational(-7));
    CHECK(ConformalConstants::make(6).eps3_power() == Rational(0));
    CHECK_THROWS_AS(ConformalConstants::make(2), ConfigError);
}

TEST_CASE("CMC vacuum data has vanishing gradient") {
    const GridChart c = box(3, 7);
    const MetricField g = flat(c);
    DataSpec s;
    s.tau = Expression::parse("1");
    const ConformalData D = assemble_data(g, s);
    for (std::size_t p = 0; p < c.node_count(); ++p) {
        CHECK(D.tau[p] == 1.0);
        for (int i = 0; i < 3; ++i) CHECK(D.dtau[p][static_cast<std::size_t>(i)] == 0.0);
        CHECK(D.eps1[p] == 0.0);
    }
    CHECK_FALSE(D.non_tt);
}

TEST_CASE("tau depending on x has an x-only gradient") {
    const GridChart c = box(3, 9);
    DataSpec s;
    s.tau = Expression::parse("1 + 0.1*tanh(x)");
    const ConformalData D = assemble_data(flat(c), s);
    double gx = 0.0;
    for (std::size_t p = 0; p < c.node_count(); ++p) {
        CHECK(D.dtau[p][1] == 0.0);
        CHECK(D.dtau[p][2] == 0.0);
        gx = std::max(gx, D.dtau[p][0]);
        const double x = c.coord(p)[0];
        CHECK(D.dtau[p][0] == doctest::Approx(0.1 / std::pow(std::cosh(x), 2)).epsilon(2e-3));
    }
    CHECK(gx > 0.0);
}

TEST_CASE("non-traceless U is flagged, above the cap it is rejected") {
    const GridChart c = box(3, 5);
    DataSpec s;
    s.U[0] = Expression::parse("0.5");
    const ConformalData D = assemble_data(flat(c), s);
    CHECK(D.non_tt);
    CHECK(D.trace_residual == doctest::Approx(0.5));
    s.U[0] = Expression::parse("5");
    CHECK_THROWS_AS(assemble_data(flat(c), s), DataError);
}

TEST_CASE("negative energy density and non-positive boundary value are data errors") {
    const GridChart c = box(3, 5);
    DataSpec s;
    s.eps2 = Expression::parse("x - 0.5");
    CHECK_THROWS_AS(assemble_data(flat(c), s), DataError);
    DataSpec b;
    b.bc_u = Expression::parse("0");
    CHECK_THROWS_AS(assemble_data(flat(c), b), DataError);
}

namespace {

FluidInputs fluid(std::size_t N) {
    FluidInputs in;
    in.mu.assign(N, 0.0);
    in.u.assign(N, Vec3{});
    in.q.assign(N, 0.0);
    in.f.assign(N, 0.0);
    in.V.assign(N, Vec3{});
    in.F.assign(N, Mat3{});
    return in;
}

}  // namespace

TEST_CASE("fluid sources: trivial fluid and direct formulas") {
    const GridChart c = box(3, 5);
    const MetricField g = flat(c);
    const std::size_t N = c.node_count();
    SUBCASE("dust at rest") {
        FluidInputs in = fluid(N);
        in.mu.assign(N, 1.0);
        const FluidSources s = sources_from_fluid(in, g);
        for (std::size_t p = 0; p < N; ++p) {
            CHECK(s.eps1[p] == 1.0);
            CHECK(s.eps2[p] == 0.0);
            CHECK(s.eps3[p] == 0.0);
            CHECK(s.q_tilde[p] == 0.0);
            for (int i = 0; i < 3; ++i) CHECK(s.omega1[p][static_cast<std::size_t>(i)] == 0.0);
        }
    }
    SUBCASE("|E|^2 = 4 gives eps2 = 2") {
        FluidInputs in = fluid(N);
        in.V.assign(N, Vec3{2.0, 0.0, 0.0});
        const FluidSources s = sources_from_fluid(in, g);
        for (std::size_t p = 0; p < N; ++p) CHECK(s.eps2[p] == doctest::Approx(2.0));
    }
    SUBCASE("moving fluid, n = 3") {
        FluidInputs in = fluid(N);
        in.mu.assign(N, 2.0);
        in.u.assign(N, Vec3{1.0, 1.0, 1.0});
        in.q.assign(N, 0.5);
        const FluidSources s = sources_from_fluid(in, g);
        for (std::size_t p = 0; p < N; ++p) {
            CHECK(s.eps1[p] == doctest::Approx(2.0 * (1.0 + 3.0)));
            const double w = std::sqrt(dot(s.omega1[p], s.omega1[p]));
            CHECK(w == doctest::Approx(2.0 * 2.0 * std::sqrt(3.0)));
            CHECK(s.q_tilde[p] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("fluid sources: F sign symmetry and E = 0 iff eps2 = 0") {
    const GridChart c = box(3, 5);
    const MetricField g = conformal(c, "1 + 0.1*x*y");
    const std::size_t N = c.node_count();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    FluidInputs in = fluid(N);
    for (std::size_t p = 0; p < N; ++p) {
        in.mu[p] = std::abs(nd(rng));
        in.u[p] = {nd(rng), nd(rng), nd(rng)};
        in.V[p] = p % 3 == 0 ? Vec3{} : Vec3{nd(rng), nd(rng), nd(rng)};
        const double a = nd(rng), b = nd(rng), e = nd(rng);
        in.F[p] = {0, a, b, -a, 0, e, -b, -e, 0};
    }
    const FluidSources s = sources_from_fluid(in, g);
    FluidInputs neg = in;
    for (auto& F : neg.F)
        for (double& x : F) x = -x;
    const FluidSources t = sources_from_fluid(neg, g);
    for (std::size_t p = 0; p < N; ++p) {
        CHECK(s.eps3[p] >= 0.0);
        CHECK(t.eps3[p] == doctest::Approx(s.eps3[p]).epsilon(1e-14));
        for (std::size_t i = 0; i < 3; ++i) CHECK(t.omega2[p][i] == doctest::Approx(-s.omega2[p][i]).epsilon(1e-14));
        const bool zero = p % 3 == 0;
        if (zero) CHECK(s.eps2[p] <= 1e-14);
        else CHECK(s.eps2[p] > 1e-14);
    }
    FluidInputs bad = in;
    bad.F[0][1] += 1.0;
    CHECK_THROWS_AS(sources_from_fluid(bad, g), DataError);
}

TEST_CASE("trace removal") {
    const GridChart c = box(3, 5);
    const MetricField g = conformal(c, "1 + 0.2*x");
    const std::size_t N = c.node_count();
    SUBCASE("pure trace vanishes") {
        const std::vector<Mat3> out = tt_project(g.components(), g);
        for (const Mat3& m : out)
            for (double v : m) CHECK(std::abs(v) <= 1e-12);
    }
    SUBCASE("flat diag(1,2,3)") {
        const MetricField f = flat(c);
        const std::vector<Mat3> out = tt_project(std::vector<Mat3>(N, Mat3{1, 0, 0, 0, 2, 0, 0, 0, 3}), f);
        for (const Mat3& m : out) {
            CHECK(at(m, 0, 0) == doctest::Approx(-1.0));
            CHECK(std::abs(at(m, 1, 1)) <= 1e-15);
            CHECK(at(m, 2, 2) == doctest::Approx(1.0));
        }
    }
    SUBCASE("traceless input unchanged, projection idempotent") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> nd;
        std::vector<Mat3> U(N);
        for (Mat3& m : U) {
            const double a = nd(rng), b = nd(rng), e = nd(rng), d0 = nd(rng), d1 = nd(rng), d2 = nd(rng);
            m = {d0, a, b, a, d1, e, b, e, d2};
        }
        const std::vector<Mat3> once = tt_project(U, g);
        const std::vector<Mat3> twice = tt_project(once, g);
        CHECK(trace_residual(once, g) <= 1e-12);
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(twice[p][i] - once[p][i]) <= 1e-12);
    }
}

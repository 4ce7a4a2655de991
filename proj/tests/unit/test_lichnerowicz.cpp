#include "doctest.h"
#include "support.hpp"

#include <sstream>

#include "cforge/errors.hpp"
#include "cforge/lichnerowicz.hpp"

using namespace cforge;
using namespace cforge::test;

namespace {

struct Coeffs {
    double tau = 0, K = 0, eps1 = 0, eps2 = 0, eps3 = 0;
};

/// h(φ) for spatially constant coefficients in dimension n with R = 0.
double h_scalar(const Coeffs& a, int n, double phi) {
    const double N = (n + 2.0) / (n - 2.0);
    return a.tau * std::pow(phi, N) - a.K * std::pow(phi, -(3.0 * n - 2.0) / (n - 2.0)) - a.eps1 * std::pow(phi, N) -
           a.eps2 * std::pow(phi, -3.0) - a.eps3 * std::pow(phi, (n - 6.0) / (n - 2.0));
}

/// Positive root by plain bisection; h is increasing when A_τ > A_ε1.
double bisect_root(const Coeffs& a, int n) {
    double lo = 1e-6, hi = 1e6;
    for (int i = 0; i < 400; ++i) {
        const double mid = std::sqrt(lo * hi);
        (h_scalar(a, n, mid) < 0 ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

LichnerowiczProblem constant_problem(const Coeffs& a, int n, std::size_t N, double boundary = 1.0) {
    const ConformalConstants k = ConformalConstants::make(n);
    const double c = k.c_n().to_double(), b = k.b_n().to_double();
    ConformalData D;
    D.tau.assign(N, std::sqrt(a.tau / b));
    D.dtau.assign(N, Vec3{});
    D.U.assign(N, Mat3{});
    D.eps1.assign(N, a.eps1 / (2 * c));
    D.eps2.assign(N, a.eps2 / (2 * c));
    D.eps3.assign(N, a.eps3 / (2 * c));
    D.omega1.assign(N, Vec3{});
    D.omega2.assign(N, Vec3{});
    return make_lichnerowicz(k, std::vector<double>(N, 0.0), std::vector<double>(N, a.K / c), D,
                             std::vector<double>(N, boundary), 0.0, 0.0);
}

}  // namespace

TEST_CASE("shift coefficient") {
    LichnerowiczProblem P;
    P.boundary = {1.0};
    P.l = 1.0;
    P.m = 2.0;
    P.terms.push_back({"zero", 1.0, {0.0}, Rational{5}});
    CHECK(shift_coefficient(P)[0] == 1e-8);
    P.terms.push_back({"eps2", -1.0, {1.0}, Rational{-3}});
    CHECK(shift_coefficient(P)[0] == doctest::Approx(3.3));
    CHECK(shift_coefficient(P, {1.5}, {1.5})[0] == doctest::Approx(1.1 * 3 * std::pow(1.5, -4.0)));
}

TEST_CASE("shifted nonlinearity is non-increasing on the bracket") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(0.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const Coeffs a{0.5 + ud(rng), ud(rng), 0.2 * ud(rng), ud(rng), ud(rng)};
        LichnerowiczProblem P = constant_problem(a, 3, 1);
        P.terms[0].coef[0] = ud(rng) - 1.0;  // R of either sign
        P.l = 0.1 + 0.2 * ud(rng);
        P.m = P.l + 3.0 * ud(rng);
        const double s = shift_coefficient(P)[0];
        double prev = P.h(0, P.l) - s * P.l;
        for (int i = 1; i <= 64; ++i) {
            const double phi = P.l * std::pow(P.m / P.l, i / 64.0);
            const double cur = P.h(0, phi) - s * phi;
            CHECK(cur <= prev + 1e-12 * std::abs(prev));
            CHECK(P.dh(0, phi) - s <= 0.0);
            prev = cur;
        }
    }
}

TEST_CASE("constant-coefficient problems converge to the algebraic root") {
    const GridChart c = torus(3, 5);
    const DiscreteOperator lap = assemble_laplace_beltrami(flat(c), Domain::full(c));
    const std::size_t N = c.node_count();
    SUBCASE("A_tau = A_eps2 = 1 gives phi = 1") {
        LichnerowiczProblem P = constant_problem({1.0, 0, 0, 1.0, 0}, 3, N);
        P.l = 0.5;
        P.m = 2.0;
        PicardOptions o;
        o.tol = 1e-12;
        const PicardResult r = picard_solve(P, lap, std::vector<double>(N, 0.5), std::vector<double>(N, 2.0), o);
        for (double v : r.phi) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("random coefficients against bisection") {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> ud(0.05, 2.0);
        for (int t = 0; t < 10; ++t) {
            const Coeffs a{ud(rng) + 0.5, 0.3 * ud(rng), 0.2 * ud(rng), ud(rng), ud(rng)};
            const double root = bisect_root(a, 3);
            LichnerowiczProblem P = constant_problem(a, 3, N);
            const auto lm = constant_barriers(P);
            REQUIRE(lm.has_value());
            P.l = lm->first;
            P.m = lm->second;
            CHECK(P.l <= root);
            CHECK(P.m >= root);
            PicardOptions o;
            o.tol = 1e-11;
            const PicardResult r =
                picard_solve(P, lap, std::vector<double>(N, P.l), std::vector<double>(N, P.m), o);
            for (double v : r.phi) CHECK(std::abs(v - root) <= 10 * o.tol + 1e-12 * root);
            for (std::size_t i = 0; i < r.trace.min_increment.size(); ++i)
                CHECK(r.trace.min_increment[i] >= -o.mp_slack * P.m);
            CHECK(r.trace.converged);
            CHECK(r.trace.contraction < 1.0);
        }
    }
}

TEST_CASE("barriers equal to the solution converge in one step") {
    const GridChart c = torus(3, 5);
    const DiscreteOperator lap = assemble_laplace_beltrami(flat(c), Domain::full(c));
    const std::size_t N = c.node_count();
    LichnerowiczProblem P = constant_problem({1.0, 0, 0, 1.0, 0}, 3, N);
    P.l = P.m = 1.0;
    const std::vector<double> one(N, 1.0);
    const PicardResult r = picard_solve(P, lap, one, one);
    CHECK(r.trace.iterations == 1);
    for (double v : r.phi) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Dirichlet problem: monotone iterates inside the barriers") {
    const GridChart c = box(3, 9);
    const DiscreteOperator lap = assemble_laplace_beltrami(conformal(c, "1 + 0.1*x*y"), Domain::full(c));
    const std::size_t N = c.node_count();
    LichnerowiczProblem P = constant_problem({1.2, 0.1, 0.1, 0.8, 0.3}, 3, N, 1.0);
    const auto lm = constant_barriers(P);
    REQUIRE(lm);
    P.l = std::min(lm->first, 1.0);
    P.m = std::max(lm->second, 1.0);
    const std::vector<double> lo(N, P.l), hi(N, P.m);
    std::vector<double> prev = lo;
    PicardOptions o;
    const PicardResult r = picard_solve(P, lap, lo, hi, o);
    const double eps = o.mp_slack * P.m;
    for (std::size_t p = 0; p < N; ++p) {
        CHECK(r.phi[p] >= P.l - eps);
        CHECK(r.phi[p] <= P.m + eps);
    }
    for (double v : r.trace.barrier_violation) CHECK(v <= eps);
    for (double v : r.trace.min_increment) CHECK(v >= -eps);
    CHECK(max_abs(lichnerowicz_residual(P, lap, r.phi)) <= 1e-7);
    std::ostringstream os;
    r.trace.write_csv(os);
    CHECK(os.str().rfind("iterate,sup_diff,bracket_violation\n", 0) == 0);
}

TEST_CASE("precondition and iteration errors") {
    const GridChart c = box(3, 5);
    const DiscreteOperator lap = assemble_laplace_beltrami(flat(c), Domain::full(c));
    const std::size_t N = c.node_count();
    LichnerowiczProblem P = constant_problem({1.0, 0, 0, 1.0, 0}, 3, N, 3.0);
    P.l = 0.5;
    P.m = 2.0;
    const std::vector<double> lo(N, 0.5), hi(N, 2.0);
    CHECK_THROWS_AS(picard_solve(P, lap, lo, hi), PreconditionError);
    CHECK_THROWS_AS(picard_solve(P, lap, hi, lo), PreconditionError);

    P.boundary.assign(N, 1.0);
    PicardOptions o;
    o.max_iter = 1;
    o.tol = 1e-14;
    try {
        picard_solve(P, lap, lo, hi, o);
        FAIL("expected PicardError");
    } catch (const PicardError& e) {
        CHECK(e.partial().phi.size() == N);
        CHECK(e.partial().trace.iterations == 1);
        CHECK_FALSE(e.partial().trace.converged);
    }
}

TEST_CASE("exponent (n-6)/(n-2) vanishes at n = 6") {
    const Coeffs a{1.0, 0.0, 0.0, 0.0, 0.7};
    const LichnerowiczProblem P = constant_problem(a, 6, 1);
    for (double phi : {0.3, 1.0, 4.0}) CHECK(P.h(0, phi) == doctest::Approx(h_scalar(a, 6, phi)));
    CHECK(P.term("eps3")->power == Rational(0));
}

TEST_CASE("Newton accelerator reaches the same root") {
    const GridChart c = torus(3, 5);
    const DiscreteOperator lap = assemble_laplace_beltrami(flat(c), Domain::full(c));
    const std::size_t N = c.node_count();
    const Coeffs a{1.3, 0.2, 0.1, 0.6, 0.4};
    LichnerowiczProblem P = constant_problem(a, 3, N);
    const auto lm = constant_barriers(P);
    REQUIRE(lm);
    P.l = lm->first;
    P.m = lm->second;
    PicardOptions o;
    o.newton = true;
    const PicardResult r = picard_solve(P, lap, std::vector<double>(N, P.l), std::vector<double>(N, P.m), o);
    for (double v : r.phi) CHECK(v == doctest::Approx(bisect_root(a, 3)).epsilon(1e-9));
}

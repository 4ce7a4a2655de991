#include "doctest.h"
#include "support.hpp"

#include "cforge/errors.hpp"
#include "cforge/momentum.hpp"
#include "cforge/spectral.hpp"

using namespace cforge;
using namespace cforge::test;

namespace {

ConformalData zero_data(std::size_t N) {
    ConformalData D;
    D.tau.assign(N, 0.0);
    D.dtau.assign(N, Vec3{});
    D.U.assign(N, Mat3{});
    D.eps1.assign(N, 0.0);
    D.eps2.assign(N, 0.0);
    D.eps3.assign(N, 0.0);
    D.omega1.assign(N, Vec3{});
    D.omega2.assign(N, Vec3{});
    return D;
}

/// X* = s·(1, ½, 0), s = sin πx sin πy sin πz, and Δ_conf X* = ΔX* + (1/3)∇div X* on flat space.
void manufactured(const Vec3& x, Vec3& X, Vec3& L) {
    const double p = M_PI;
    const double sx = std::sin(p * x[0]), sy = std::sin(p * x[1]), sz = std::sin(p * x[2]);
    const double cx = std::cos(p * x[0]), cy = std::cos(p * x[1]), cz = std::cos(p * x[2]);
    const double s = sx * sy * sz;
    X = {s, 0.5 * s, 0.0};
    const Vec3 gd{p * p * (-s + 0.5 * cx * cy * sz), p * p * (cx * cy * sz - 0.5 * s),
                  p * p * (cx * sy * cz + 0.5 * sx * cy * cz)};
    for (std::size_t i = 0; i < 3; ++i) L[i] = -3 * p * p * X[i] + gd[i] / 3.0;
}

double mms_error(int nodes) {
    const GridChart c = box(3, nodes);
    const MetricField g = flat(c);
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, Domain::full(c));
    std::vector<Vec3> Xs(c.node_count()), rhs(c.node_count());
    for (std::size_t p = 0; p < Xs.size(); ++p) manufactured(c.coord(p), Xs[p], rhs[p]);
    const MomentumSolution s = solve_momentum(ckl, g, rhs, std::vector<Vec3>(c.node_count(), Vec3{}));
    double e = 0.0;
    for (std::size_t p = 0; p < Xs.size(); ++p)
        for (std::size_t i = 0; i < 3; ++i) e = std::max(e, std::abs(s.X[p][i] - Xs[p][i]));
    return e;
}

}  // namespace

TEST_CASE("momentum right-hand side") {
    const ConformalConstants k = ConformalConstants::make(3);
    const std::size_t N = 4;
    ConformalData D = zero_data(N);
    for (const Vec3& r : momentum_rhs(std::vector<double>(N, 1.7), D, k, 3))
        for (double v : r) CHECK(v == 0.0);

    D.dtau.assign(N, Vec3{0.3, -0.6, 0.9});
    D.omega1.assign(N, Vec3{0.1, 0.2, 0.0});
    D.omega2.assign(N, Vec3{0.0, 0.5, -0.25});
    for (const Vec3& r : momentum_rhs(std::vector<double>(N, 1.0), D, k, 3)) {
        CHECK(r[0] == doctest::Approx(2.0 / 3.0 * 0.3 + 0.1));
        CHECK(r[1] == doctest::Approx(2.0 / 3.0 * -0.6 + 0.2 - 0.5));
        CHECK(r[2] == doctest::Approx(2.0 / 3.0 * 0.9 + 0.25));
    }

    ConformalData E = zero_data(N);
    E.dtau.assign(N, Vec3{1.0, 0.0, 0.0});
    for (const Vec3& r : momentum_rhs(std::vector<double>(N, 2.0), E, k, 3)) CHECK(r[0] == doctest::Approx(128.0 / 3.0));

    CHECK_THROWS_AS(momentum_rhs({1.0, 0.0, 1.0, 1.0}, E, k, 3), DomainError);
}

TEST_CASE("doubling phi scales the gradient part exactly") {
    const ConformalConstants k = ConformalConstants::make(3);
    ConformalData D = zero_data(3);
    D.dtau = {Vec3{0.1, 0.2, 0.3}, Vec3{-1, 0, 2}, Vec3{0.5, 0.5, 0.5}};
    const std::vector<double> phi{0.7, 1.1, 1.9};
    std::vector<double> phi2(phi);
    for (double& v : phi2) v *= 2.0;
    const auto a = momentum_rhs(phi, D, k, 3);
    const auto b = momentum_rhs(phi2, D, k, 3);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t i = 0; i < 3; ++i) CHECK(b[p][i] == doctest::Approx(64.0 * a[p][i]).epsilon(1e-14));
}

TEST_CASE("zero data gives the zero field") {
    const GridChart c = box(3, 9);
    const MetricField g = flat(c);
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, Domain::full(c));
    const std::vector<Vec3> z(c.node_count(), Vec3{});
    const MomentumSolution s = solve_momentum(ckl, g, z, z);
    for (const Vec3& v : s.X)
        for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("manufactured solution is recovered at second order") {
    const double e1 = mms_error(9), e2 = mms_error(17);
    CHECK(e2 < 0.02);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("a posteriori L2 bound, tracelessness and superposition") {
    const GridChart c = box(3, 9);
    const MetricField g = conformal(c, "1 + 0.1*x*y");
    const Domain dom = Domain::full(c);
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, dom);
    const double lambda = lambda1_conf(g, dom).lambda;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    std::vector<Vec3> r1(c.node_count()), r2(c.node_count()), r12(c.node_count());
    for (std::size_t p = 0; p < r1.size(); ++p) {
        r1[p] = {nd(rng), nd(rng), nd(rng)};
        r2[p] = {std::sin(c.coord(p)[0]), 0.0, nd(rng)};
        for (std::size_t i = 0; i < 3; ++i) r12[p][i] = r1[p][i] + r2[p][i];
    }
    MomentumOptions o;
    o.lambda1 = lambda;
    o.linear.tol = 1e-13;
    const std::vector<Vec3> zero(c.node_count(), Vec3{});
    const MomentumSolution a = solve_momentum(ckl, g, r1, zero, o);
    const MomentumSolution b = solve_momentum(ckl, g, r2, zero, o);
    const MomentumSolution ab = solve_momentum(ckl, g, r12, zero, o);
    for (const MomentumSolution* s : {&a, &b, &ab}) {
        CHECK(s->bound_checked);
        CHECK(s->bound_holds);
        CHECK(s->norm_X <= s->norm_rhs / lambda * (1.0 + 1e-6));
        CHECK(s->residual <= 1e-12);
        for (std::size_t p = 0; p < c.node_count(); ++p) CHECK(std::abs(trace_raised(s->LX[p], g.ginv(p), 3)) <= 1e-10);
    }
    double scale = 0.0, diff = 0.0;
    for (std::size_t p = 0; p < c.node_count(); ++p)
        for (std::size_t i = 0; i < 3; ++i) {
            scale = std::max(scale, std::abs(ab.X[p][i]));
            diff = std::max(diff, std::abs(ab.X[p][i] - a.X[p][i] - b.X[p][i]));
        }
    CHECK(diff <= 1e-9 * scale);
}

TEST_CASE("non-positive eigenvalue is a spectral error") {
    const GridChart c = box(3, 5);
    const MetricField g = flat(c);
    const DiscreteOperator ckl = assemble_conformal_killing_laplacian(g, Domain::full(c));
    MomentumOptions o;
    o.lambda1 = 0.0;
    const std::vector<Vec3> z(c.node_count(), Vec3{});
    CHECK_THROWS_AS(solve_momentum(ckl, g, z, z, o), SpectralError);
}

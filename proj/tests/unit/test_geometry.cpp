#include "doctest.h"
#include "support.hpp"

#include "cforge/conformal_data.hpp"
#include "cforge/errors.hpp"

using namespace cforge;
using namespace cforge::test;

TEST_CASE("chart construction and spacing") {
    const GridChart t = torus(3, 17);
    CHECK(t.node_count() == 17u * 17u * 17u);
    for (int a = 0; a < 3; ++a) CHECK(t.spacing(a) == doctest::Approx(1.0 / 17.0));
    CHECK_FALSE(t.has_dirichlet());

    const GridChart b = box(2, 9, 2.0);
    CHECK(b.node_count() == 81u);
    CHECK(b.spacing(0) == doctest::Approx(0.25));
    CHECK(b.has_dirichlet());

    for (std::size_t p = 0; p < b.node_count(); ++p) CHECK(b.index(b.ijk(p)) == p);
}

TEST_CASE("chart rejects invalid counts and extents") {
    CHECK_THROWS_AS(torus(3, 2), ConfigError);
    CHECK_THROWS_AS(box(3, 9, -1.0), ConfigError);
    CHECK_THROWS_AS(GridChart::build(1, {1.0}, {9}, {BoundaryKind::dirichlet}), ConfigError);
    CHECK_THROWS_AS(GridChart::build(3, {1.0, 1.0}, {9, 9}, {BoundaryKind::dirichlet, BoundaryKind::dirichlet}),
                    ConfigError);
}

TEST_CASE("periodic neighbors wrap, Dirichlet neighbors leave the grid") {
    const GridChart t = torus(2, 5);
    CHECK(t.neighbor(t.index({0, 0, 0}), 0, -1) == static_cast<long>(t.index({4, 0, 0})));
    const GridChart b = box(2, 5);
    CHECK(b.neighbor(b.index({0, 2, 0}), 0, -1) == -1);
    CHECK(b.on_boundary(b.index({0, 2, 0})));
    CHECK_FALSE(b.on_boundary(b.index({1, 2, 0})));
}

TEST_CASE("flat and unit conformal factor give the identity metric") {
    const GridChart c = box(3, 7);
    const MetricField f = flat(c);
    const MetricField u = conformal(c, "1");
    for (std::size_t p = 0; p < c.node_count(); ++p)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                CHECK(at(f.g(p), i, j) == (i == j ? 1.0 : 0.0));
                CHECK(at(u.g(p), i, j) == at(f.g(p), i, j));
            }
}

TEST_CASE("metric inverse, symmetry and node-wise eigenvalues") {
    const GridChart c = torus(3, 9);
    const MetricField g = conformal(c, "1 + 0.1*sin(2*pi*x)");
    double min_eig = 1e300;
    for (std::size_t p = 0; p < c.node_count(); ++p) {
        Eigen::Matrix3d G;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                G(i, j) = at(g.g(p), i, j);
                CHECK(at(g.g(p), i, j) == at(g.g(p), j, i));
            }
        const Mat3 prod = matmul(g.ginv(p), g.g(p), 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(at(prod, i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(G).eigenvalues().minCoeff());
        const double psi = 1.0 + 0.1 * std::sin(2.0 * M_PI * c.coord(p)[0]);
        CHECK(g.sqrt_det(p) == doctest::Approx(std::pow(psi, 6.0)).epsilon(1e-12));
    }
    CHECK(g.min_eigenvalue() == doctest::Approx(min_eig).epsilon(1e-12));
    CHECK(min_eig > 0.0);
}

TEST_CASE("non-SPD custom metric names the node") {
    const GridChart c = box(2, 5);
    MetricSpec s;
    s.kind = MetricGenerator::custom;
    s.components = {Expression::parse("1"), Expression::parse("0"), Expression::parse("0"),
                    Expression::parse("x - 0.5"), Expression::parse("0"), Expression::parse("1")};
    try {
        metric_from_generator(c, s);
        FAIL("expected MetricError");
    } catch (const MetricError& e) {
        CHECK(c.coord(e.node())[0] <= 0.5);
    }
}

TEST_CASE("flat and constant-factor curvature vanish") {
    const GridChart c = box(3, 9);
    const CurvaturePack f = curvature(flat(c));
    CHECK(max_abs(f.scalar) == 0.0);
    CHECK(max_abs(f.christoffel) == 0.0);
    const CurvaturePack s = curvature(conformal(c, "2"));
    CHECK(max_abs(s.scalar) <= 1e-12);
}

namespace {

double psi_fn(const Vec3& x) { return 1.0 + 0.1 * std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]); }

/// R = −a_n ψ^{−(n+2)/(n−2)} Δ_δ ψ for n = 3, with the flat Laplacian in closed form.
double scalar_closed(const Vec3& x) {
    const double lap = -8.0 * M_PI * M_PI * 0.1 * std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
    return -8.0 * std::pow(psi_fn(x), -5.0) * lap;
}

double curvature_error(int nodes) {
    const GridChart c = torus(3, nodes);
    const CurvaturePack cp = curvature(conformal(c, "1 + 0.1*sin(2*pi*x)*sin(2*pi*y)"));
    double e = 0.0;
    for (std::size_t p = 0; p < c.node_count(); ++p) e = std::max(e, std::abs(cp.scalar[p] - scalar_closed(c.coord(p))));
    return e;
}

}  // namespace

TEST_CASE("conformally flat scalar curvature converges at second order") {
    const double e1 = curvature_error(16);
    const double e2 = curvature_error(32);
    CHECK(e2 < e1);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("Christoffel symbols are symmetric in the lower indices") {
    const GridChart c = box(3, 9);
    const CurvaturePack cp = curvature(conformal(c, "1 + 0.2*x*y + 0.1*z^2"));
    for (std::size_t p = 0; p < c.node_count(); ++p)
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(cp.gamma(p, k, i, j) == cp.gamma(p, k, j, i));
}

TEST_CASE("exhaustion nesting") {
    SUBCASE("single level is the full domain") {
        const GridChart c = box(3, 9);
        const Exhaustion ex = build_exhaustion(c, 1);
        CHECK(ex.levels() == 1);
        for (std::uint8_t m : ex.mask(1)) CHECK(m == 1);
        CHECK(ex.domain(1).dof_count() == Domain::full(c).dof_count());
    }
    SUBCASE("four strictly nested boxes") {
        const GridChart c = box(3, 33);
        const Exhaustion ex = build_exhaustion(c, 4, 0.25);
        REQUIRE(ex.levels() == 4);
        for (int k = 1; k < 4; ++k) {
            const auto inner = ex.mask(k);
            const auto outer = ex.mask(k + 1);
            for (std::size_t p = 0; p < inner.size(); ++p) {
                if (inner[p]) CHECK(outer[p]);
                if (inner[p]) CHECK(ex.box(k + 1).strictly_contains(c.ijk(p), 3));
            }
            const auto inner1 = ex.mask(1);
            for (std::size_t p = 0; p < inner1.size(); ++p)
                if (inner1[p]) CHECK(inner[p]);
        }
        for (std::uint8_t m : ex.mask(4)) CHECK(m == 1);
    }
    SUBCASE("collapse on a coarse grid") { CHECK_THROWS_AS(build_exhaustion(box(3, 5), 4), ConfigError); }
    SUBCASE("periodic chart rejected") { CHECK_THROWS_AS(build_exhaustion(torus(3, 9), 2), ConfigError); }
}

#include "doctest.h"

#include <random>

#include "cforge/errors.hpp"
#include "cforge/regularity.hpp"

using namespace cforge;

TEST_CASE("ladder examples") {
    CHECK(bootstrap_exponents(3).str() == "2, j_max=0");
    CHECK(bootstrap_exponents(6).str() == "2 6, j_max=1");
    const ExponentLadder l12 = bootstrap_exponents(12);
    CHECK(l12.str() == "2 3 6, j_max=2");
    CHECK(l12.borderline);
    CHECK_FALSE(bootstrap_exponents(6).borderline);
    CHECK_THROWS_AS(bootstrap_exponents(2), PreconditionError);
}

TEST_CASE("ladder agrees with a floating-point recurrence and increases") {
    for (int n = 3; n <= 14; ++n) {
        const ExponentLadder L = bootstrap_exponents(n);
        double p = 2.0;
        std::size_t j = 0;
        CHECK(L.p[0] == Rational{2});
        while (p < n / 2.0 - 1e-12) {
            p = n * p / (n - 2.0 * p);
            ++j;
            REQUIRE(j < L.p.size());
            CHECK(L.p[j].to_double() == doctest::Approx(p).epsilon(1e-12));
        }
        CHECK(static_cast<std::size_t>(L.j_max) == j);
        CHECK(L.p.back() >= Rational(n, 2));
        for (int k = 0; k < L.j_max; ++k) {
            CHECK(L.p[static_cast<std::size_t>(k)] < Rational(n, 2));
            CHECK(L.p[static_cast<std::size_t>(k)] < L.p[static_cast<std::size_t>(k + 1)]);
        }
    }
}

TEST_CASE("multiplication conditions") {
    const GateResult bad = check_multiplication(1, 1, 1, 3);
    CHECK_FALSE(bad.ok);
    CHECK(bad.reason.find("n/2") != std::string::npos);
    for (int n = 3; n <= 12; ++n) {
        const Rational t = Rational(n, 2) + Rational(1, 4);
        CHECK(check_multiplication(t, t, t, n).ok);
        const Rational s = Rational(n, 2) + Rational(5, 4);
        CHECK(check_multiplication(s, s - 2, std::min(s - 1, s - 2), n).ok);
    }
    CHECK_FALSE(check_multiplication(1, 2, 3, 3).ok);
    CHECK_FALSE(check_multiplication(-5, 1, -6, 3).ok);
}

TEST_CASE("multiplication gate is monotone") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> num(-16, 24);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 3 + trial % 10;
        const Rational r1(num(rng), 4), r2(num(rng), 4), s(num(rng), 4);
        if (!check_multiplication(r1, r2, s, n).ok) continue;
        CHECK(check_multiplication(r1 + Rational(1, 4), r2, s, n).ok);
        CHECK(check_multiplication(r1, r2 + Rational(1, 2), s, n).ok);
        CHECK(check_multiplication(r1, r2, s - Rational(1, 4), n).ok);
    }
}

TEST_CASE("Hs gate") {
    CHECK(hs_feasible(3, 3).ok);
    const HsGate g13 = hs_feasible(13, 9);
    CHECK_FALSE(g13.ok);
    CHECK(g13.regularity);
    CHECK_FALSE(g13.dimension);
    const HsGate g12 = hs_feasible(12, 7);
    CHECK_FALSE(g12.ok);
    CHECK_FALSE(g12.regularity);
    CHECK(g12.dimension);
    CHECK(hs_feasible(12, Rational(71, 10)).ok);
}

TEST_CASE("rational arithmetic is exact") {
    for (int n = 3; n <= 20; ++n) {
        const Rational a(4 * (n - 1), n - 2), c(n - 2, 4 * (n - 1));
        CHECK(a * c == Rational(1));
    }
    CHECK(Rational(6, -4) == Rational(-3, 2));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(3, 2).str() == "3/2");
    CHECK_THROWS(Rational(1, 0));
}

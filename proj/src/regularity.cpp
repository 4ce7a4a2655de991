#include "cforge/regularity.hpp"

#include <algorithm>

#include "cforge/errors.hpp"

namespace cforge {

std::string ExponentLadder::str() const {
    std::string s;
    for (std::size_t j = 0; j < p.size(); ++j) s += (j ? " " : "") + p[j].str();
    return s + ", j_max=" + std::to_string(j_max);
}

ExponentLadder bootstrap_exponents(int n) {
    if (n < 3) throw PreconditionError("bootstrap_exponents: n must be at least 3");
    ExponentLadder L;
    L.n = n;
    const Rational half{n, 2};
    Rational p{2};
    L.p.push_back(p);
    while (p < half) {
        p = Rational{n} * p / (Rational{n} - Rational{2} * p);
        L.p.push_back(p);
    }
    L.j_max = static_cast<int>(L.p.size()) - 1;
    L.borderline = L.p.back() == half;
    return L;
}

GateResult check_multiplication(Rational r1, Rational r2, Rational sigma, int n) {
    if (sigma > std::min(r1, r2)) return {false, "sigma exceeds min(r1, r2)"};
    if (r1 + r2 < Rational{0}) return {false, "r1 + r2 is negative"};
    if (!(r1 + r2 > Rational{n, 2} + sigma)) return {false, "r1 + r2 does not exceed n/2 + sigma"};
    return {true, "ok"};
}

HsGate hs_feasible(int n, Rational s) {
    if (n < 3) throw PreconditionError("hs_feasible: n must be at least 3");
    HsGate g;
    g.regularity = s > Rational{n, 2} + Rational{1};
    g.dimension = n <= 12;
    g.ok = g.regularity && g.dimension;
    return g;
}

}  // namespace cforge

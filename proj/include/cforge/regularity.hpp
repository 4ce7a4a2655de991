#pragma once

#include <string>
#include <vector>

#include "cforge/rational.hpp"

namespace cforge {

/// p₀ = 2, p_{j+1} = n p_j/(n − 2p_j) until p_j ≥ n/2.
struct ExponentLadder {
    int n = 3;
    std::vector<Rational> p;
    int j_max = 0;
    /// p_{j_max} = n/2 exactly; the recurrence would divide by zero next.
    bool borderline = false;

    /// "2 3 6, j_max=2".
    std::string str() const;
};

ExponentLadder bootstrap_exponents(int n);

struct GateResult {
    bool ok = false;
    std::string reason;
};

/// σ ≤ min(r₁, r₂), r₁ + r₂ ≥ 0 and r₁ + r₂ > n/2 + σ.
GateResult check_multiplication(Rational r1, Rational r2, Rational sigma, int n);

struct HsGate {
    bool ok = false;
    bool regularity = false;  ///< s > n/2 + 1
    bool dimension = false;   ///< n ≤ 12
};

HsGate hs_feasible(int n, Rational s);

}  // namespace cforge

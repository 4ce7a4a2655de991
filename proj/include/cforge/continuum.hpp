#pragma once

#include <array>

#include "cforge/geometry.hpp"

namespace cforge {

/// Value and gradient of a scalar at a point.
struct D1 {
    double v = 0.0;
    std::array<double, 3> g{};
};

/// Pointwise geometry of an expression-defined metric: γ, γ⁻¹ and Γ with
/// their first derivatives, from exact jets of the components.
struct Frame {
    int d = 3;
    std::array<D1, 9> g, ginv;
    /// ∂_k γ_ij at [9k + 3i + j].
    std::array<D1, 27> dg;
    /// Γ^k_ij at [9k + 3i + j].
    std::array<D1, 27> gamma;
    double sqrt_det = 1.0;

    double G(int i, int j) const { return g[static_cast<std::size_t>(3 * i + j)].v; }
    double Ginv(int i, int j) const { return ginv[static_cast<std::size_t>(3 * i + j)].v; }
    const D1& Gam(int k, int i, int j) const { return gamma[static_cast<std::size_t>(9 * k + 3 * i + j)]; }
};

/// Evaluates a metric generator with exact derivatives. Nodal metrics have
/// no expression form and raise ConfigError.
class ContinuumMetric {
public:
    ContinuumMetric(const MetricSpec& spec, int dim);
    int dim() const { return d_; }
    Frame frame(const Vec3& x) const;

private:
    MetricSpec spec_;
    int d_ = 3;
};

double laplace_beltrami(const Frame& f, const Jet& u);
double scalar_curvature(const Frame& f);
/// £_conf X with lower indices; trace removal uses the frame dimension.
Mat3 conformal_killing(const Frame& f, const std::array<Jet, 3>& X);
/// div_γ £_conf X as a covector.
Vec3 conformal_killing_laplacian(const Frame& f, const std::array<Jet, 3>& X);

}  // namespace cforge

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cforge/expression.hpp"
#include "cforge/tensor.hpp"

namespace cforge {

enum class BoundaryKind { periodic, dirichlet };

using Index3 = std::array<int, 3>;

/// Structured uniform grid on a box, one boundary kind per axis.
///
/// Dirichlet axes carry nodes at both ends (h = L/(N-1)); periodic axes do
/// not repeat the endpoint (h = L/N). Node indices run x fastest.
class GridChart {
public:
    GridChart() = default;
    static GridChart build(int dim, std::vector<double> extents, std::vector<int> nodes,
                           std::vector<BoundaryKind> kinds, std::vector<double> origin = {});

    int dim() const { return dim_; }
    int nodes(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
    double extent(int axis) const { return len_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
    double origin(int axis) const { return x0_[static_cast<std::size_t>(axis)]; }
    BoundaryKind kind(int axis) const { return kind_[static_cast<std::size_t>(axis)]; }
    std::size_t node_count() const { return count_; }
    double cell_volume() const { return volume_; }
    bool has_dirichlet() const;

    std::size_t index(const Index3& ijk) const {
        return static_cast<std::size_t>(ijk[0]) +
               static_cast<std::size_t>(n_[0]) *
                   (static_cast<std::size_t>(ijk[1]) +
                    static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(ijk[2]));
    }
    Index3 ijk(std::size_t idx) const;
    Vec3 coord(std::size_t idx) const;
    Vec3 center() const;

    /// True when the node lies on a Dirichlet face.
    bool on_boundary(std::size_t idx) const;

    /// Node at ijk + off, wrapping periodic axes; -1 when it leaves the grid.
    long offset(std::size_t idx, const Index3& off) const;
    long neighbor(std::size_t idx, int axis, int step) const {
        Index3 off{0, 0, 0};
        off[static_cast<std::size_t>(axis)] = step;
        return offset(idx, off);
    }

    bool operator==(const GridChart& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && len_ == o.len_ && kind_ == o.kind_ && x0_ == o.x0_;
    }

private:
    int dim_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> len_{1, 1, 1};
    std::array<double, 3> h_{1, 1, 1};
    std::array<double, 3> x0_{0, 0, 0};
    std::array<BoundaryKind, 3> kind_{BoundaryKind::periodic, BoundaryKind::periodic,
                                      BoundaryKind::periodic};
    std::size_t count_ = 0;
    double volume_ = 1.0;
};

/// Second-order derivative of f[node*stride + comp] along an axis: centered in
/// the interior and on periodic axes, one-sided three-point at Dirichlet faces.
double derivative(const GridChart& chart, std::span<const double> f, std::size_t stride,
                  std::size_t comp, std::size_t node, int axis);

/// Same as `derivative` for a field of Mat3 entries.
Mat3 derivative(const GridChart& chart, std::span<const Mat3> f, std::size_t node, int axis);

enum class MetricGenerator { flat, conformally_flat, custom, nodal };

struct MetricSpec {
    MetricGenerator kind = MetricGenerator::flat;
    Expression psi = Expression::constant(1.0);  ///< conformally flat factor
    /// Components xx, xy, xz, yy, yz, zz for the custom generator.
    std::array<Expression, 6> components{};
    /// Dimension used in the conformal exponent 4/(n-2).
    int conformal_n = 3;
};

/// Node-wise symmetric positive definite metric with cached inverse, volume
/// factor and first derivatives of the components.
class MetricField {
public:
    MetricField() = default;
    /// Validates symmetry and positive definiteness and fills the caches.
    static MetricField from_nodal(const GridChart& chart, std::vector<Mat3> g,
                                  MetricGenerator tag = MetricGenerator::nodal);

    const GridChart& chart() const { return chart_; }
    int dim() const { return chart_.dim(); }
    MetricGenerator generator() const { return tag_; }
    std::size_t size() const { return g_.size(); }

    const Mat3& g(std::size_t node) const { return g_[node]; }
    const Mat3& ginv(std::size_t node) const { return ginv_[node]; }
    double sqrt_det(std::size_t node) const { return sqrt_det_[node]; }
    /// ∂_axis γ_ij at a node (finite differences of the nodal field).
    const Mat3& dg(std::size_t node, int axis) const {
        return dg_[3 * node + static_cast<std::size_t>(axis)];
    }
    const std::vector<Mat3>& components() const { return g_; }
    double min_eigenvalue() const { return min_eig_; }

    /// The metric c2·γ.
    MetricField scaled(double c2) const;

private:
    GridChart chart_;
    MetricGenerator tag_ = MetricGenerator::nodal;
    std::vector<Mat3> g_, ginv_, dg_;
    std::vector<double> sqrt_det_;
    double min_eig_ = 0.0;
};

MetricField metric_from_generator(const GridChart& chart, const MetricSpec& spec);

/// Christoffel symbols, Ricci tensor and scalar curvature by finite differences.
struct CurvaturePack {
    /// Γ^k_ij stored at [27*node + 9k + 3i + j].
    std::vector<double> christoffel;
    std::vector<Mat3> ricci;
    std::vector<double> scalar;
    /// Node-wise smallest eigenvalue of Ric relative to γ.
    std::vector<double> ricci_min;
    double ricci_min_eigenvalue = 0.0;

    double gamma(std::size_t node, int k, int i, int j) const {
        return christoffel[27 * node + static_cast<std::size_t>(9 * k + 3 * i + j)];
    }
};

CurvaturePack curvature(const MetricField& metric);

/// Closed box of node indices [lo, hi] per axis.
struct Box {
    Index3 lo{0, 0, 0};
    Index3 hi{0, 0, 0};

    bool contains(const Index3& p, int dim) const {
        for (int a = 0; a < dim; ++a) {
            const auto s = static_cast<std::size_t>(a);
            if (p[s] < lo[s] || p[s] > hi[s]) return false;
        }
        return true;
    }
    bool strictly_contains(const Index3& p, int dim) const {
        for (int a = 0; a < dim; ++a) {
            const auto s = static_cast<std::size_t>(a);
            if (p[s] <= lo[s] || p[s] >= hi[s]) return false;
        }
        return true;
    }
};

/// A set of unknown nodes on a chart. Every other node is held fixed.
class Domain {
public:
    Domain() = default;
    /// All nodes not on a Dirichlet face.
    static Domain full(const GridChart& chart);
    /// Nodes strictly inside the box (a box spanning a periodic axis has no faces there).
    static Domain box(const GridChart& chart, const Box& box);
    /// Masked nodes not on a Dirichlet face.
    static Domain from_mask(const GridChart& chart, const std::vector<std::uint8_t>& mask);

    const GridChart& chart() const { return chart_; }
    std::size_t dof_count() const { return dofs_.size(); }
    const std::vector<std::size_t>& dof_nodes() const { return dofs_; }
    long dof_index(std::size_t node) const { return index_[node]; }
    bool is_dof(std::size_t node) const { return index_[node] >= 0; }
    /// Whether some dof couples to a fixed node (false only on fully periodic charts).
    bool has_fixed_neighbors() const { return has_fixed_; }
    /// Unknown nodes plus every node within one step (including diagonals).
    std::vector<std::uint8_t> closure() const;

private:
    void finish();

    GridChart chart_;
    std::vector<long> index_;
    std::vector<std::size_t> dofs_;
    bool has_fixed_ = false;
};

/// Nested centered boxes Ω₁ ⊂⊂ … ⊂⊂ Ω_K = full Dirichlet chart.
class Exhaustion {
public:
    const GridChart& chart() const { return chart_; }
    int levels() const { return static_cast<int>(boxes_.size()); }
    /// Level k in 1..K.
    const Box& box(int k) const { return boxes_[static_cast<std::size_t>(k - 1)]; }
    Domain domain(int k) const { return Domain::box(chart_, box(k)); }
    /// Closed-box node mask of level k.
    std::vector<std::uint8_t> mask(int k) const;

    friend Exhaustion build_exhaustion(const GridChart& chart, int K, double shrink);

private:
    GridChart chart_;
    std::vector<Box> boxes_;
};

/// Level k spans the fraction 1 − (K−k)·shrink of the half-width about the
/// center; shrink ≤ 0 selects 1/K.
Exhaustion build_exhaustion(const GridChart& chart, int K, double shrink = 0.0);

}  // namespace cforge

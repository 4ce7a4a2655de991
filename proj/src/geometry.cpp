#include "cforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cforge/errors.hpp"

namespace cforge {

GridChart GridChart::build(int dim, std::vector<double> extents, std::vector<int> nodes,
                           std::vector<BoundaryKind> kinds, std::vector<double> origin) {
    if (dim < 2 || dim > 3) throw ConfigError("chart dimension must be 2 or 3");
    const auto d = static_cast<std::size_t>(dim);
    if (extents.size() != d || nodes.size() != d || kinds.size() != d)
        throw ConfigError("chart: per-axis lists must have dim entries");
    if (origin.empty()) origin.assign(d, 0.0);
    if (origin.size() != d) throw ConfigError("chart: origin must have dim entries");

    GridChart c;
    c.dim_ = dim;
    c.count_ = 1;
    for (std::size_t a = 0; a < d; ++a) {
        if (nodes[a] < 3) throw ConfigError("chart: need at least 3 nodes per axis");
        if (!(extents[a] > 0.0) || !std::isfinite(extents[a]))
            throw ConfigError("chart: extents must be positive");
        c.n_[a] = nodes[a];
        c.len_[a] = extents[a];
        c.kind_[a] = kinds[a];
        c.x0_[a] = origin[a];
        c.h_[a] = kinds[a] == BoundaryKind::periodic ? extents[a] / nodes[a]
                                                      : extents[a] / (nodes[a] - 1);
        c.count_ *= static_cast<std::size_t>(nodes[a]);
        c.volume_ *= c.h_[a];
    }
    for (std::size_t a = d; a < 3; ++a) {
        c.n_[a] = 1;
        c.h_[a] = 1.0;
        c.len_[a] = 0.0;
    }
    return c;
}

bool GridChart::has_dirichlet() const {
    for (int a = 0; a < dim_; ++a)
        if (kind(a) == BoundaryKind::dirichlet) return true;
    return false;
}

Index3 GridChart::ijk(std::size_t idx) const {
    const auto n0 = static_cast<std::size_t>(n_[0]);
    const auto n1 = static_cast<std::size_t>(n_[1]);
    return {static_cast<int>(idx % n0), static_cast<int>((idx / n0) % n1),
            static_cast<int>(idx / (n0 * n1))};
}

Vec3 GridChart::coord(std::size_t idx) const {
    const Index3 p = ijk(idx);
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
        const auto s = static_cast<std::size_t>(a);
        x[s] = x0_[s] + p[s] * h_[s];
    }
    return x;
}

Vec3 GridChart::center() const {
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
        const auto s = static_cast<std::size_t>(a);
        x[s] = x0_[s] + 0.5 * len_[s];
    }
    return x;
}

bool GridChart::on_boundary(std::size_t idx) const {
    const Index3 p = ijk(idx);
    for (int a = 0; a < dim_; ++a) {
        const auto s = static_cast<std::size_t>(a);
        if (kind_[s] == BoundaryKind::dirichlet && (p[s] == 0 || p[s] == n_[s] - 1)) return true;
    }
    return false;
}

long GridChart::offset(std::size_t idx, const Index3& off) const {
    Index3 p = ijk(idx);
    for (int a = 0; a < 3; ++a) {
        const auto s = static_cast<std::size_t>(a);
        if (off[s] == 0) continue;
        if (a >= dim_) return -1;
        int q = p[s] + off[s];
        if (kind_[s] == BoundaryKind::periodic) {
            q %= n_[s];
            if (q < 0) q += n_[s];
        } else if (q < 0 || q >= n_[s]) {
            return -1;
        }
        p[s] = q;
    }
    return static_cast<long>(index(p));
}

namespace {

/// Weights (w0,w1,w2) and node offsets of the second-order first-derivative
/// stencil along one axis at grid position i.
struct Stencil3 {
    int off[3];
    double w[3];
};

Stencil3 first_derivative_stencil(const GridChart& c, std::size_t node, int axis) {
    const double h = c.spacing(axis);
    const int i = c.ijk(node)[static_cast<std::size_t>(axis)];
    const int n = c.nodes(axis);
    if (c.kind(axis) == BoundaryKind::dirichlet && i == 0)
        return {{0, 1, 2}, {-1.5 / h, 2.0 / h, -0.5 / h}};
    if (c.kind(axis) == BoundaryKind::dirichlet && i == n - 1)
        return {{0, -1, -2}, {1.5 / h, -2.0 / h, 0.5 / h}};
    return {{-1, 1, 0}, {-0.5 / h, 0.5 / h, 0.0}};
}

}  // namespace

double derivative(const GridChart& chart, std::span<const double> f, std::size_t stride,
                  std::size_t comp, std::size_t node, int axis) {
    if (axis >= chart.dim()) return 0.0;
    const Stencil3 s = first_derivative_stencil(chart, node, axis);
    // Weights sum to zero; differencing against the center keeps constants exact.
    const double f0 = f[node * stride + comp];
    double r = 0.0;
    for (int t = 0; t < 3; ++t) {
        if (s.w[t] == 0.0) continue;
        const long q = chart.neighbor(node, axis, s.off[t]);
        r += s.w[t] * (f[static_cast<std::size_t>(q) * stride + comp] - f0);
    }
    return r;
}

Mat3 derivative(const GridChart& chart, std::span<const Mat3> f, std::size_t node, int axis) {
    Mat3 r{};
    if (axis >= chart.dim()) return r;
    const Stencil3 s = first_derivative_stencil(chart, node, axis);
    for (int t = 0; t < 3; ++t) {
        if (s.w[t] == 0.0) continue;
        const auto q = static_cast<std::size_t>(chart.neighbor(node, axis, s.off[t]));
        for (std::size_t e = 0; e < 9; ++e) r[e] += s.w[t] * (f[q][e] - f[node][e]);
    }
    return r;
}

MetricField MetricField::from_nodal(const GridChart& chart, std::vector<Mat3> g,
                                    MetricGenerator tag) {
    const int d = chart.dim();
    if (g.size() != chart.node_count()) throw ConfigError("metric: wrong node count");
    MetricField m;
    m.chart_ = chart;
    m.tag_ = tag;
    m.ginv_.resize(g.size());
    m.sqrt_det_.resize(g.size());
    m.min_eig_ = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j)
                if (at(g[p], i, j) != at(g[p], j, i))
                    throw MetricError("metric not symmetric at node " + std::to_string(p), p);
        const double lmin = symmetric_eigenvalues(g[p], d)[0];
        if (!(lmin > 0.0) || !std::isfinite(lmin))
            throw MetricError("metric not positive definite at node " + std::to_string(p), p);
        m.min_eig_ = std::min(m.min_eig_, lmin);
        m.ginv_[p] = inverse(g[p], d);
        m.sqrt_det_[p] = std::sqrt(det(g[p], d));
    }
    m.g_ = std::move(g);
    m.dg_.resize(3 * m.g_.size());
    for (std::size_t p = 0; p < m.g_.size(); ++p)
        for (int a = 0; a < d; ++a)
            m.dg_[3 * p + static_cast<std::size_t>(a)] = derivative(chart, m.g_, p, a);
    return m;
}

MetricField MetricField::scaled(double c2) const {
    std::vector<Mat3> g = g_;
    for (auto& m : g)
        for (auto& e : m) e *= c2;
    return from_nodal(chart_, std::move(g), tag_);
}

MetricField metric_from_generator(const GridChart& chart, const MetricSpec& spec) {
    const int d = chart.dim();
    std::vector<Mat3> g(chart.node_count());
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 x = chart.coord(p);
        switch (spec.kind) {
        case MetricGenerator::flat:
        case MetricGenerator::nodal: g[p] = identity3(d); break;
        case MetricGenerator::conformally_flat: {
            if (spec.conformal_n < 3) throw ConfigError("conformal exponent needs n >= 3");
            const double psi = spec.psi.eval(x);
            if (!(psi > 0.0))
                throw MetricError("conformal factor not positive at node " + std::to_string(p), p);
            const double s = std::pow(psi, 4.0 / (spec.conformal_n - 2));
            g[p] = identity3(d);
            for (auto& e : g[p]) e *= s;
            break;
        }
        case MetricGenerator::custom: {
            static constexpr int slot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
            g[p] = Mat3{};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    at(g[p], i, j) = spec.components[static_cast<std::size_t>(slot[i][j])].eval(x);
            break;
        }
        }
    }
    return MetricField::from_nodal(chart, std::move(g), spec.kind);
}

CurvaturePack curvature(const MetricField& metric) {
    const GridChart& c = metric.chart();
    const int d = c.dim();
    const std::size_t N = c.node_count();
    CurvaturePack pack;
    pack.christoffel.assign(27 * N, 0.0);
    for (std::size_t p = 0; p < N; ++p) {
        const Mat3& gi = metric.ginv(p);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < d; ++l)
                        s += at(gi, k, l) * (at(metric.dg(p, i), j, l) + at(metric.dg(p, j), i, l) -
                                             at(metric.dg(p, l), i, j));
                    pack.christoffel[27 * p + static_cast<std::size_t>(9 * k + 3 * i + j)] = 0.5 * s;
                }
    }

    // R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik
    pack.ricci.assign(N, Mat3{});
    pack.scalar.assign(N, 0.0);
    pack.ricci_min.assign(N, 0.0);
    pack.ricci_min_eigenvalue = std::numeric_limits<double>::infinity();
    const std::span<const double> G(pack.christoffel);
    for (std::size_t p = 0; p < N; ++p) {
        Mat3 ric{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) {
                    s += derivative(c, G, 27, static_cast<std::size_t>(9 * k + 3 * i + j), p, k);
                    s -= derivative(c, G, 27, static_cast<std::size_t>(9 * k + 3 * i + k), p, j);
                    for (int l = 0; l < d; ++l) {
                        s += pack.gamma(p, k, k, l) * pack.gamma(p, l, i, j);
                        s -= pack.gamma(p, k, j, l) * pack.gamma(p, l, i, k);
                    }
                }
                at(ric, i, j) = s;
            }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j) at(ric, i, j) = at(ric, j, i) = 0.5 * (at(ric, i, j) + at(ric, j, i));
        pack.ricci[p] = ric;
        pack.scalar[p] = trace_raised(ric, metric.ginv(p), d);

        // Eigenvalues of Ric relative to γ: those of L⁻¹ Ric L⁻ᵀ with γ = L Lᵀ.
        const Mat3& g = metric.g(p);
        Mat3 L{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = at(g, i, j);
                for (int k = 0; k < j; ++k) s -= at(L, i, k) * at(L, j, k);
                at(L, i, j) = i == j ? std::sqrt(s) : s / at(L, j, j);
            }
        const Mat3 Li = inverse(L, d);
        Mat3 LiT{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) at(LiT, i, j) = at(Li, j, i);
        Mat3 S = matmul(matmul(Li, ric, d), LiT, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j) at(S, i, j) = at(S, j, i) = 0.5 * (at(S, i, j) + at(S, j, i));
        pack.ricci_min[p] = symmetric_eigenvalues(S, d)[0];
        pack.ricci_min_eigenvalue = std::min(pack.ricci_min_eigenvalue, pack.ricci_min[p]);
    }
    return pack;
}

Domain Domain::full(const GridChart& chart) {
    Domain dom;
    dom.chart_ = chart;
    dom.index_.assign(chart.node_count(), -1);
    for (std::size_t p = 0; p < chart.node_count(); ++p)
        if (!chart.on_boundary(p)) dom.index_[p] = 0;
    dom.finish();
    return dom;
}

Domain Domain::box(const GridChart& chart, const Box& b) {
    Domain dom;
    dom.chart_ = chart;
    dom.index_.assign(chart.node_count(), -1);
    for (std::size_t p = 0; p < chart.node_count(); ++p) {
        if (chart.on_boundary(p)) continue;
        const Index3 q = chart.ijk(p);
        bool inside = true;
        for (int a = 0; a < chart.dim() && inside; ++a) {
            const auto s = static_cast<std::size_t>(a);
            const bool spans = chart.kind(a) == BoundaryKind::periodic && b.lo[s] == 0 &&
                               b.hi[s] == chart.nodes(a) - 1;
            inside = spans ? true : (q[s] > b.lo[s] && q[s] < b.hi[s]);
        }
        if (inside) dom.index_[p] = 0;
    }
    dom.finish();
    return dom;
}

Domain Domain::from_mask(const GridChart& chart, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != chart.node_count()) throw ConfigError("domain mask: wrong node count");
    Domain dom;
    dom.chart_ = chart;
    dom.index_.assign(chart.node_count(), -1);
    for (std::size_t p = 0; p < chart.node_count(); ++p)
        if (mask[p] && !chart.on_boundary(p)) dom.index_[p] = 0;
    dom.finish();
    return dom;
}

void Domain::finish() {
    dofs_.clear();
    for (std::size_t p = 0; p < index_.size(); ++p)
        if (index_[p] >= 0) {
            index_[p] = static_cast<long>(dofs_.size());
            dofs_.push_back(p);
        }
    has_fixed_ = false;
    for (std::size_t p : dofs_) {
        for (int a = 0; a < chart_.dim() && !has_fixed_; ++a)
            for (int s : {-1, 1}) {
                const long q = chart_.neighbor(p, a, s);
                if (q < 0 || index_[static_cast<std::size_t>(q)] < 0) has_fixed_ = true;
            }
        if (has_fixed_) break;
    }
}

std::vector<std::uint8_t> Domain::closure() const {
    std::vector<std::uint8_t> m(index_.size(), 0);
    const int d = chart_.dim();
    for (std::size_t p : dofs_) {
        for (int dz = (d > 2 ? -1 : 0); dz <= (d > 2 ? 1 : 0); ++dz)
            for (int dy = (d > 1 ? -1 : 0); dy <= (d > 1 ? 1 : 0); ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long q = chart_.offset(p, {dx, dy, dz});
                    if (q >= 0) m[static_cast<std::size_t>(q)] = 1;
                }
    }
    return m;
}

std::vector<std::uint8_t> Exhaustion::mask(int k) const {
    std::vector<std::uint8_t> m(chart_.node_count(), 0);
    const Box& b = box(k);
    for (std::size_t p = 0; p < m.size(); ++p) m[p] = b.contains(chart_.ijk(p), chart_.dim()) ? 1 : 0;
    return m;
}

Exhaustion build_exhaustion(const GridChart& chart, int K, double shrink) {
    if (K < 1) throw ConfigError("exhaustion: need at least one level");
    for (int a = 0; a < chart.dim(); ++a)
        if (chart.kind(a) != BoundaryKind::dirichlet)
            throw ConfigError("exhaustion: chart must be Dirichlet on every axis");
    if (shrink <= 0.0) shrink = 1.0 / K;
    if (shrink * (K - 1) >= 1.0) throw ConfigError("exhaustion: shrink factor too large for K");

    Exhaustion ex;
    ex.chart_ = chart;
    for (int k = 1; k <= K; ++k) {
        const double frac = 1.0 - (K - k) * shrink;
        Box b;
        for (int a = 0; a < chart.dim(); ++a) {
            const auto s = static_cast<std::size_t>(a);
            const int n = chart.nodes(a);
            const int lo = static_cast<int>(std::floor((n - 1) * (1.0 - frac) / 2.0 + 1e-9));
            b.lo[s] = lo;
            b.hi[s] = n - 1 - lo;
            if (b.hi[s] - b.lo[s] < 2)
                throw ConfigError("exhaustion: level " + std::to_string(k) +
                                  " collapses to fewer than 3 nodes per axis");
            if (!ex.boxes_.empty() && ex.boxes_.back().lo[s] <= lo)
                throw ConfigError("exhaustion: levels " + std::to_string(k - 1) + " and " +
                                  std::to_string(k) + " are not strictly nested");
        }
        ex.boxes_.push_back(b);
    }
    return ex;
}

}  // namespace cforge

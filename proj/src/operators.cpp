#include "cforge/operators.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

/// One entry of the local gradient vector G: ∂_axis u^comp, or u^comp itself.
struct Factor {
    bool derivative;
    int axis;
    int comp;
};

/// A grid value entering a difference quotient: node offset, component, weight.
struct Tap {
    Index3 off;
    int comp;
    double w;
};

int offset_code(const Index3& o) { return (o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1); }

Index3 code_offset(int c) { return {c % 3 - 1, (c / 3) % 3 - 1, c / 9 - 1}; }

Index3 unit(int axis, int step) {
    Index3 o{0, 0, 0};
    o[static_cast<std::size_t>(axis)] = step;
    return o;
}

Index3 minus(const Index3& a, const Index3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// Pointwise quadratic-form coefficients C_αβ(p) for every node, stored as nF² blocks.
struct Coefficients {
    std::vector<Factor> factors;
    std::vector<double> c;
    std::size_t nf = 0;

    double at(std::size_t node, std::size_t a, std::size_t b) const { return c[(node * nf + a) * nf + b]; }
    bool same_direction(std::size_t a, std::size_t b) const {
        return factors[a].derivative && factors[b].derivative && factors[a].axis == factors[b].axis;
    }
};

Coefficients scalar_coefficients(const MetricField& metric) {
    const int d = metric.dim();
    Coefficients k;
    for (int a = 0; a < d; ++a) k.factors.push_back({true, a, 0});
    k.nf = k.factors.size();
    k.c.assign(metric.size() * k.nf * k.nf, 0.0);
    for (std::size_t p = 0; p < metric.size(); ++p)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                k.c[(p * k.nf + static_cast<std::size_t>(a)) * k.nf + static_cast<std::size_t>(b)] =
                    metric.sqrt_det(p) * at(metric.ginv(p), a, b);
    return k;
}

/// £_conf X is linear in G = (∂_a X^k, X^k); T[α] is its coefficient tensor.
std::vector<Mat3> conformal_tensors(const MetricField& metric, std::size_t p,
                                    const std::vector<Factor>& factors) {
    const int d = metric.dim();
    const Mat3& g = metric.g(p);
    const Mat3& gi = metric.ginv(p);
    const double two_d = 2.0 / d;
    std::vector<Mat3> T(factors.size(), Mat3{});
    for (std::size_t f = 0; f < factors.size(); ++f) {
        Mat3& t = T[f];
        const int k = factors[f].comp;
        if (factors[f].derivative) {
            const int a = factors[f].axis;
            for (int j = 0; j < d; ++j) {
                cforge::at(t, a, j) += cforge::at(g, k, j);
                cforge::at(t, j, a) += cforge::at(g, j, k);
            }
            if (a == k)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) cforge::at(t, i, j) -= two_d * cforge::at(g, i, j);
        } else {
            const Mat3& dk = metric.dg(p, k);
            const double trace_k = 0.5 * trace_raised(dk, gi, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    cforge::at(t, i, j) += cforge::at(dk, i, j) - two_d * trace_k * cforge::at(g, i, j);
        }
    }
    return T;
}

Coefficients conformal_coefficients(const MetricField& metric) {
    const int d = metric.dim();
    Coefficients k;
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) k.factors.push_back({true, a, c});
    for (int c = 0; c < d; ++c) k.factors.push_back({false, 0, c});
    k.nf = k.factors.size();
    k.c.assign(metric.size() * k.nf * k.nf, 0.0);
    for (std::size_t p = 0; p < metric.size(); ++p) {
        const std::vector<Mat3> T = conformal_tensors(metric, p, k.factors);
        const double s = 0.5 * metric.sqrt_det(p);
        for (std::size_t a = 0; a < k.nf; ++a)
            for (std::size_t b = a; b < k.nf; ++b) {
                const double v = s * contract_raised(T[a], T[b], metric.ginv(p), d);
                k.c[(p * k.nf + a) * k.nf + b] = v;
                k.c[(p * k.nf + b) * k.nf + a] = v;
            }
    }
    return k;
}

/// Taps of a factor evaluated at a node with centered differences; neighbors
/// off the grid are dropped (their value counts as zero).
std::vector<Tap> node_taps(const GridChart& chart, std::size_t p, const Factor& f) {
    if (!f.derivative) return {Tap{{0, 0, 0}, f.comp, 1.0}};
    std::vector<Tap> t;
    const double w = 0.5 / chart.spacing(f.axis);
    if (chart.neighbor(p, f.axis, 1) >= 0) t.push_back({unit(f.axis, 1), f.comp, w});
    if (chart.neighbor(p, f.axis, -1) >= 0) t.push_back({unit(f.axis, -1), f.comp, -w});
    return t;
}

/// Visits every term of the split quadrature as (anchor node, coefficient,
/// taps of α, taps of β). Same-direction derivative pairs live on the edge
/// p → p+e_a with averaged coefficient and one-sided differences; every other
/// pair lives on the node with centered differences.
template <class Visit>
void for_each_term(const GridChart& chart, const Coefficients& k, Visit&& visit) {
    const int d = chart.dim();
    const std::size_t N = chart.node_count();
    std::vector<std::vector<Tap>> taps(k.nf);
    for (std::size_t p = 0; p < N; ++p) {
        for (std::size_t a = 0; a < k.nf; ++a) taps[a] = node_taps(chart, p, k.factors[a]);
        for (std::size_t a = 0; a < k.nf; ++a)
            for (std::size_t b = 0; b < k.nf; ++b) {
                if (k.same_direction(a, b)) continue;
                const double c = k.at(p, a, b);
                if (c != 0.0) visit(p, c, taps[a], taps[b]);
            }
        for (int axis = 0; axis < d; ++axis) {
            const long q = chart.neighbor(p, axis, 1);
            if (q < 0) continue;
            const double ih = 1.0 / chart.spacing(axis);
            for (std::size_t a = 0; a < k.nf; ++a) {
                if (!k.factors[a].derivative || k.factors[a].axis != axis) continue;
                const std::vector<Tap> ta{{unit(axis, 1), k.factors[a].comp, ih},
                                          {{0, 0, 0}, k.factors[a].comp, -ih}};
                for (std::size_t b = 0; b < k.nf; ++b) {
                    if (!k.same_direction(a, b)) continue;
                    const double c = 0.5 * (k.at(p, a, b) + k.at(static_cast<std::size_t>(q), a, b));
                    if (c == 0.0) continue;
                    const std::vector<Tap> tb{{unit(axis, 1), k.factors[b].comp, ih},
                                              {{0, 0, 0}, k.factors[b].comp, -ih}};
                    visit(p, c, ta, tb);
                }
            }
        }
    }
}

DiscreteOperator assemble(const MetricField& metric, const Domain& domain, const Coefficients& k,
                          BlockKind kind, int block) {
    const GridChart& chart = metric.chart();
    if (!(domain.chart() == chart)) throw ConfigError("operator: domain and metric charts differ");
    const std::size_t ndof = domain.dof_count();
    const auto B = static_cast<std::size_t>(block);
    const double hd = chart.cell_volume();

    // Per dof row: 27 neighbor offsets × B² component pairs.
    std::vector<double> table(ndof * 27 * B * B, 0.0);
    for_each_term(chart, k, [&](std::size_t p, double c, const std::vector<Tap>& ta,
                                const std::vector<Tap>& tb) {
        for (const Tap& x : ta) {
            const long r = chart.offset(p, x.off);
            const long dr = domain.dof_index(static_cast<std::size_t>(r));
            if (dr < 0) continue;
            for (const Tap& y : tb) {
                const int code = offset_code(minus(y.off, x.off));
                table[((static_cast<std::size_t>(dr) * 27 + static_cast<std::size_t>(code)) * B +
                       static_cast<std::size_t>(x.comp)) * B + static_cast<std::size_t>(y.comp)] +=
                    hd * c * x.w * y.w;
            }
        }
    });

    DiscreteOperator op;
    op.domain = domain;
    op.kind = kind;
    op.block = block;
    op.symmetric = true;
    op.boundary = chart.has_dirichlet() ? BoundaryKind::dirichlet : BoundaryKind::periodic;
    op.stiffness = CsrMatrix(ndof * B, ndof * B);
    op.coupling = CsrMatrix(ndof * B, chart.node_count() * B);
    op.mass.resize(ndof);
    if (kind == BlockKind::vector) op.gamma.resize(ndof);
    const std::vector<std::size_t>& dofs = domain.dof_nodes();
    for (std::size_t i = 0; i < ndof; ++i) {
        const std::size_t node = dofs[i];
        op.mass[i] = hd * metric.sqrt_det(node);
        if (kind == BlockKind::vector) op.gamma[i] = metric.g(node);
        for (std::size_t ci = 0; ci < B; ++ci) {
            std::vector<std::pair<std::size_t, double>> inner, outer;
            for (int code = 0; code < 27; ++code) {
                const double* row = &table[((i * 27 + static_cast<std::size_t>(code)) * B + ci) * B];
                bool any = false;
                for (std::size_t cj = 0; cj < B; ++cj) any = any || row[cj] != 0.0;
                if (!any) continue;
                const long col = chart.offset(node, code_offset(code));
                const long dc = domain.dof_index(static_cast<std::size_t>(col));
                for (std::size_t cj = 0; cj < B; ++cj) {
                    if (row[cj] == 0.0) continue;
                    if (dc >= 0)
                        inner.emplace_back(static_cast<std::size_t>(dc) * B + cj, row[cj]);
                    else
                        outer.emplace_back(static_cast<std::size_t>(col) * B + cj, row[cj]);
                }
            }
            op.stiffness.push_row(std::move(inner));
            op.coupling.push_row(std::move(outer));
        }
    }
    return op;
}

}  // namespace

std::vector<double> DiscreteOperator::gather(std::span<const double> full) const {
    const auto B = static_cast<std::size_t>(block);
    const auto& dofs = domain.dof_nodes();
    std::vector<double> out(dofs.size() * B);
    for (std::size_t i = 0; i < dofs.size(); ++i)
        for (std::size_t c = 0; c < B; ++c) out[i * B + c] = full[dofs[i] * B + c];
    return out;
}

void DiscreteOperator::scatter(std::span<const double> dof, std::span<double> full) const {
    const auto B = static_cast<std::size_t>(block);
    const auto& dofs = domain.dof_nodes();
    for (std::size_t i = 0; i < dofs.size(); ++i)
        for (std::size_t c = 0; c < B; ++c) full[dofs[i] * B + c] = dof[i * B + c];
}

std::vector<double> DiscreteOperator::boundary_load(std::span<const double> full) const {
    std::vector<double> y(unknowns(), 0.0);
    coupling.multiply(full, y);
    for (double& v : y) v = -v;
    return y;
}

std::vector<double> DiscreteOperator::apply(std::span<const double> full) const {
    const auto B = static_cast<std::size_t>(block);
    const std::vector<double> u = gather(full);
    std::vector<double> y(unknowns(), 0.0);
    stiffness.multiply(u, y);
    coupling.multiply_add(full, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = -y[i] / mass[i / B];
    return y;
}

DiscreteOperator assemble_laplace_beltrami(const MetricField& metric, const Domain& domain) {
    return assemble(metric, domain, scalar_coefficients(metric), BlockKind::scalar, 1);
}

DiscreteOperator assemble_conformal_killing_laplacian(const MetricField& metric,
                                                      const Domain& domain) {
    return assemble(metric, domain, conformal_coefficients(metric), BlockKind::vector, metric.dim());
}

double conformal_energy(const MetricField& metric, const std::vector<Vec3>& X) {
    const GridChart& chart = metric.chart();
    const Coefficients k = conformal_coefficients(metric);
    auto value = [&](std::size_t p, const std::vector<Tap>& taps) {
        double s = 0.0;
        for (const Tap& t : taps) {
            const long q = chart.offset(p, t.off);
            if (q >= 0) s += t.w * X[static_cast<std::size_t>(q)][static_cast<std::size_t>(t.comp)];
        }
        return s;
    };
    double e = 0.0;
    for_each_term(chart, k, [&](std::size_t p, double c, const std::vector<Tap>& ta,
                                const std::vector<Tap>& tb) { e += c * value(p, ta) * value(p, tb); });
    // The coefficients carry ½|£X|², so the quadrature sum is half the norm.
    return 2.0 * chart.cell_volume() * e;
}

std::vector<Mat3> conformal_killing_operator(const MetricField& metric, const std::vector<Vec3>& X) {
    const GridChart& chart = metric.chart();
    const int d = chart.dim();
    const std::size_t N = chart.node_count();
    std::span<const double> flat(X.data()->data(), 3 * N);
    std::vector<Mat3> out(N, Mat3{});
    for (std::size_t p = 0; p < N; ++p) {
        const Mat3& g = metric.g(p);
        const Mat3& gi = metric.ginv(p);
        double dX[3][3] = {};
        for (int a = 0; a < d; ++a)
            for (int k = 0; k < d; ++k)
                dX[a][k] = derivative(chart, flat, 3, static_cast<std::size_t>(k), p, a);
        double div = 0.0;
        for (int k = 0; k < d; ++k)
            div += dX[k][k] + 0.5 * trace_raised(metric.dg(p, k), gi, d) * X[p][static_cast<std::size_t>(k)];
        Mat3& L = out[p];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = -2.0 / d * div * at(g, i, j);
                for (int k = 0; k < d; ++k)
                    s += X[p][static_cast<std::size_t>(k)] * at(metric.dg(p, k), i, j) +
                         at(g, k, j) * dX[i][k] + at(g, i, k) * dX[j][k];
                at(L, i, j) = s;
            }
    }
    return out;
}

std::vector<double> divergence(const MetricField& metric, const std::vector<Vec3>& X) {
    const GridChart& chart = metric.chart();
    const int d = chart.dim();
    const std::size_t N = chart.node_count();
    std::vector<double> flux(3 * N, 0.0);
    for (std::size_t p = 0; p < N; ++p)
        for (int k = 0; k < d; ++k)
            flux[3 * p + static_cast<std::size_t>(k)] = metric.sqrt_det(p) * X[p][static_cast<std::size_t>(k)];
    std::vector<double> out(N, 0.0);
    for (std::size_t p = 0; p < N; ++p) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += derivative(chart, flux, 3, static_cast<std::size_t>(k), p, k);
        out[p] = s / metric.sqrt_det(p);
    }
    return out;
}

std::vector<double> flatten(const std::vector<Vec3>& v, int d) {
    const auto D = static_cast<std::size_t>(d);
    std::vector<double> out(v.size() * D);
    for (std::size_t p = 0; p < v.size(); ++p)
        for (std::size_t c = 0; c < D; ++c) out[p * D + c] = v[p][c];
    return out;
}

std::vector<Vec3> unflatten(std::span<const double> v, int d) {
    const auto D = static_cast<std::size_t>(d);
    std::vector<Vec3> out(v.size() / D, Vec3{});
    for (std::size_t p = 0; p < out.size(); ++p)
        for (std::size_t c = 0; c < D; ++c) out[p][c] = v[p * D + c];
    return out;
}

CsrMatrix mass_matrix(const DiscreteOperator& op, std::span<const double> a) {
    const auto B = static_cast<std::size_t>(op.block);
    const std::size_t n = op.unknowns();
    CsrMatrix m(n, n);
    for (std::size_t i = 0; i < op.mass.size(); ++i) {
        const double s = op.mass[i] * (a.empty() ? 1.0 : a[i]);
        for (std::size_t ci = 0; ci < B; ++ci) {
            std::vector<std::pair<std::size_t, double>> row;
            if (op.kind == BlockKind::scalar)
                row.emplace_back(i, s);
            else
                for (std::size_t cj = 0; cj < B; ++cj)
                    row.emplace_back(i * B + cj, s * op.gamma[i][3 * ci + cj]);
            m.push_row(std::move(row));
        }
    }
    return m;
}

CsrMatrix shifted_stiffness(const DiscreteOperator& op, std::span<const double> a) {
    if (a.empty()) return op.stiffness;
    const CsrMatrix G = mass_matrix(op, a);
    std::vector<CsrMatrix::Triplet> t;
    t.reserve(op.stiffness.nnz() + G.nnz());
    for (const CsrMatrix* m : {&op.stiffness, &G})
        for (std::size_t r = 0; r < m->rows(); ++r)
            for (std::size_t k = m->row_ptr()[r]; k < m->row_ptr()[r + 1]; ++k)
                t.push_back({r, m->col_index()[k], m->values()[k]});
    return CsrMatrix::from_triplets(op.unknowns(), op.unknowns(), std::move(t));
}

std::vector<double> solve_dirichlet(const DiscreteOperator& op, std::span<const double> a,
                                    std::span<const double> f, std::span<const double> bc,
                                    const LinearSolveOptions& opt, std::span<const double> warm,
                                    LinearSolveReport* report) {
    const auto B = static_cast<std::size_t>(op.block);
    if (f.size() != op.unknowns()) throw ConfigError("solve_dirichlet: rhs size mismatch");
    if (!a.empty() && a.size() != op.mass.size()) throw ConfigError("solve_dirichlet: shift size mismatch");
    const std::size_t full_size = op.domain.chart().node_count() * B;
    if (!bc.empty() && bc.size() != full_size) throw ConfigError("solve_dirichlet: boundary size mismatch");

    std::vector<double> full = bc.empty() ? std::vector<double>(full_size, 0.0)
                                          : std::vector<double>(bc.begin(), bc.end());
    // (Δ_h − a)u = f  ⇔  (K + G_γ a) u = −m f − C u_fixed; f is a covector for vector blocks.
    std::vector<double> rhs = op.boundary_load(full);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= op.mass[i / B] * f[i];

    const CsrMatrix A = shifted_stiffness(op, a);
    std::vector<double> x0;
    if (!warm.empty()) x0 = warm.size() == full_size ? op.gather(warm) : std::vector<double>(warm.begin(), warm.end());
    LinearSolveResult res = solve_linear(A, rhs, x0, opt);
    if (report) *report = res.report;
    op.scatter(res.x, full);
    return full;
}

}  // namespace cforge

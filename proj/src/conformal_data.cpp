#include "cforge/conformal_data.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

constexpr int kSym[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

std::vector<double> nodal(const GridChart& c, const Expression& e) {
    std::vector<double> v(c.node_count());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = e.eval(c.coord(p));
    return v;
}

std::vector<Vec3> nodal_vector(const GridChart& c, const std::array<Expression, 3>& e) {
    std::vector<Vec3> v(c.node_count(), Vec3{});
    for (std::size_t p = 0; p < v.size(); ++p) {
        const Vec3 x = c.coord(p);
        for (int i = 0; i < c.dim(); ++i) v[p][static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i)].eval(x);
    }
    return v;
}

void require_nonnegative(const std::vector<double>& f, const char* name) {
    for (std::size_t p = 0; p < f.size(); ++p)
        if (!(f[p] >= 0.0))
            throw DataError(std::string(name) + " is negative at node " + std::to_string(p));
}

Vec3 raise(const Mat3& ginv, const Vec3& v, int d) {
    Vec3 r{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r[static_cast<std::size_t>(i)] += at(ginv, i, j) * v[static_cast<std::size_t>(j)];
    return r;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

ConformalConstants ConformalConstants::make(int n) {
    if (n < 3) throw ConfigError("conformal dimension n must be at least 3");
    return ConformalConstants{n};
}

std::vector<Vec3> gradient(const GridChart& chart, const std::vector<double>& u) {
    std::vector<Vec3> g(chart.node_count(), Vec3{});
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int a = 0; a < chart.dim(); ++a)
            g[p][static_cast<std::size_t>(a)] = derivative(chart, u, 1, 0, p, a);
    return g;
}

ConformalData assemble_data(const MetricField& metric, const DataSpec& spec) {
    const GridChart& c = metric.chart();
    const int d = c.dim();
    ConformalData D;
    D.tau = nodal(c, spec.tau);
    D.dtau = gradient(c, D.tau);
    D.U.assign(c.node_count(), Mat3{});
    for (std::size_t p = 0; p < c.node_count(); ++p) {
        const Vec3 x = c.coord(p);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) at(D.U[p], i, j) = spec.U[static_cast<std::size_t>(kSym[i][j])].eval(x);
    }
    D.eps1 = nodal(c, spec.eps1);
    D.eps2 = nodal(c, spec.eps2);
    D.eps3 = nodal(c, spec.eps3);
    require_nonnegative(D.eps1, "eps1");
    require_nonnegative(D.eps2, "eps2");
    require_nonnegative(D.eps3, "eps3");
    D.omega1 = nodal_vector(c, spec.omega1);
    D.omega2 = nodal_vector(c, spec.omega2);

    if (spec.has_em) {
        EmPack em;
        em.F.assign(c.node_count(), Mat3{});
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (std::size_t p = 0; p < c.node_count(); ++p) {
            const Vec3 x = c.coord(p);
            for (std::size_t k = 0; k < 3; ++k) {
                const int i = pairs[k][0], j = pairs[k][1];
                if (j >= d) continue;
                const double v = spec.F[k].eval(x);
                at(em.F[p], i, j) = v;
                at(em.F[p], j, i) = -v;
            }
        }
        em.q = nodal(c, spec.q);
        em.V = nodal_vector(c, spec.V);
        D.em = std::move(em);
    }

    if (spec.bc_u) {
        D.bc_u = nodal(c, *spec.bc_u);
        for (std::size_t p = 0; p < c.node_count(); ++p)
            if (c.on_boundary(p) && !(D.bc_u[p] > 0.0))
                throw DataError("boundary value u is not positive at node " + std::to_string(p));
    }
    D.bc_v = nodal_vector(c, spec.bc_v);
    D.bc_w = nodal(c, spec.bc_w);

    D.trace_residual = trace_residual(D.U, metric);
    D.div_residual = divergence_residual(D.U, metric);
    D.non_tt = D.trace_residual > spec.tt_tol || D.div_residual > spec.tt_tol;
    if (D.trace_residual > spec.trace_cap)
        throw DataError("trace of U exceeds the hard cap: " + std::to_string(D.trace_residual));
    return D;
}

void em_sources(const MetricField& metric, const std::vector<Mat3>& F, const std::vector<Vec3>& E,
                std::vector<double>& eps2, std::vector<Vec3>& omega2) {
    const int d = metric.dim();
    eps2.assign(E.size(), 0.0);
    omega2.assign(E.size(), Vec3{});
    for (std::size_t p = 0; p < E.size(); ++p) {
        const Vec3 Eu = raise(metric.ginv(p), E[p], d);
        eps2[p] = 0.5 * dot(Eu, E[p]);
        for (int k = 0; k < d; ++k) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += at(F[p], i, k) * Eu[static_cast<std::size_t>(i)];
            omega2[p][static_cast<std::size_t>(k)] = s;
        }
    }
}

FluidSources sources_from_fluid(const FluidInputs& in, const MetricField& metric) {
    const GridChart& c = metric.chart();
    const int d = c.dim();
    const std::size_t N = c.node_count();
    require_nonnegative(in.mu, "mu");
    for (std::size_t p = 0; p < N; ++p)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (at(in.F[p], i, j) != -at(in.F[p], j, i))
                    throw DataError("F is not antisymmetric at node " + std::to_string(p));

    FluidSources s;
    s.eps1.resize(N);
    s.eps3.resize(N);
    s.q_tilde.resize(N);
    s.omega1.assign(N, Vec3{});
    const std::vector<Vec3> df = gradient(c, in.f);
    std::vector<Vec3> E(N);
    for (std::size_t p = 0; p < N; ++p) {
        const Mat3& g = metric.g(p);
        Vec3 u_low{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) u_low[static_cast<std::size_t>(i)] += at(g, i, j) * in.u[p][static_cast<std::size_t>(j)];
        const double u2 = dot(u_low, in.u[p]);
        const double lorentz = std::sqrt(1.0 + u2);
        s.eps1[p] = in.mu[p] * (1.0 + u2);
        for (std::size_t k = 0; k < 3; ++k) s.omega1[p][k] = in.mu[p] * lorentz * u_low[k];
        s.eps3[p] = 0.25 * contract_raised(in.F[p], in.F[p], metric.ginv(p), d) * -1.0;
        s.q_tilde[p] = in.q[p] * lorentz;
        for (std::size_t k = 0; k < 3; ++k) E[p][k] = df[p][k] + in.V[p][k];
    }
    em_sources(metric, in.F, E, s.eps2, s.omega2);
    return s;
}

std::vector<Mat3> tt_project(const std::vector<Mat3>& U, const MetricField& metric) {
    const int d = metric.dim();
    std::vector<Mat3> out(U.size());
    for (std::size_t p = 0; p < U.size(); ++p) {
        const double tr = trace_raised(U[p], metric.ginv(p), d) / d;
        out[p] = U[p];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) at(out[p], i, j) -= tr * at(metric.g(p), i, j);
    }
    return out;
}

double trace_residual(const std::vector<Mat3>& U, const MetricField& metric) {
    double r = 0.0;
    for (std::size_t p = 0; p < U.size(); ++p)
        r = std::max(r, std::abs(trace_raised(U[p], metric.ginv(p), metric.dim())));
    return r;
}

double divergence_residual(const std::vector<Mat3>& U, const MetricField& metric) {
    const GridChart& c = metric.chart();
    const int d = c.dim();
    double r = 0.0;
    for (std::size_t p = 0; p < U.size(); ++p) {
        const Mat3& gi = metric.ginv(p);
        // Γ_kai (all lower) = ½(∂_a γ_ki + ∂_i γ_ka − ∂_k γ_ai)
        auto gamma_low = [&](int k, int a, int i) {
            return 0.5 * (at(metric.dg(p, a), k, i) + at(metric.dg(p, i), k, a) -
                          at(metric.dg(p, k), a, i));
        };
        Mat3 dU[3];
        for (int a = 0; a < d; ++a) dU[a] = derivative(c, U, p, a);
        Vec3 div{};
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i = 0; i < d; ++i)
                for (int a = 0; a < d; ++a) {
                    double t = at(dU[a], i, j);
                    for (int k = 0; k < d; ++k)
                        for (int l = 0; l < d; ++l) {
                            const double Gk_ai = at(gi, k, l) * gamma_low(l, a, i);
                            const double Gk_aj = at(gi, k, l) * gamma_low(l, a, j);
                            t -= Gk_ai * at(U[p], k, j) + Gk_aj * at(U[p], i, k);
                        }
                    s += at(gi, i, a) * t;
                }
            div[static_cast<std::size_t>(j)] = s;
        }
        r = std::max(r, std::sqrt(std::max(0.0, dot(raise(gi, div, d), div))));
    }
    return r;
}

}  // namespace cforge

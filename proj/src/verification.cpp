#include "cforge/verification.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cforge/errors.hpp"
#include "cforge/operators.hpp"

namespace cforge {

namespace {

double covector_norm(const Mat3& ginv, const Vec3& w, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            s += at(ginv, a, b) * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)];
    return std::sqrt(std::max(0.0, s));
}

std::vector<std::uint8_t> measured_mask(const GridChart& c, int layer) {
    std::vector<std::uint8_t> m(c.node_count(), 1);
    for (std::size_t p = 0; p < m.size(); ++p) {
        const Index3 ijk = c.ijk(p);
        for (int a = 0; a < c.dim(); ++a) {
            if (c.kind(a) != BoundaryKind::dirichlet) continue;
            const int i = ijk[static_cast<std::size_t>(a)];
            if (i < layer || i > c.nodes(a) - 1 - layer) m[p] = 0;
        }
    }
    return m;
}

}  // namespace

InitialDataSet reconstruct(const MetricField& gamma, const std::vector<double>& phi, const std::vector<Vec3>& X,
                           const std::vector<double>& f, const ConformalData& data, const ConformalConstants& k) {
    const GridChart& c = gamma.chart();
    const int d = c.dim();
    const std::size_t N = c.node_count();
    if (phi.size() != N) throw ConfigError("reconstruct: phi has the wrong size");
    for (std::size_t p = 0; p < N; ++p)
        if (!(phi[p] > 0.0)) throw DomainError("reconstruct: phi is not positive at node " + std::to_string(p));

    const double mp = k.metric_power().to_double();
    std::vector<Mat3> g(N);
    for (std::size_t p = 0; p < N; ++p) {
        g[p] = gamma.g(p);
        const double s = std::pow(phi[p], mp);
        for (auto& e : g[p]) e *= s;
    }
    InitialDataSet ids;
    ids.g = MetricField::from_nodal(c, std::move(g), MetricGenerator::nodal);

    const std::vector<Mat3> L = X.empty() ? std::vector<Mat3>(N, Mat3{}) : conformal_killing_operator(gamma, X);
    ids.K.resize(N);
    for (std::size_t p = 0; p < N; ++p) {
        const double s = 1.0 / (phi[p] * phi[p]);
        const double t = data.tau[p] / k.n;
        for (std::size_t e = 0; e < 9; ++e) ids.K[p][e] = s * (L[p][e] + data.U[p][e]) + t * ids.g.g(p)[e];
        ids.trace_defect = std::max(ids.trace_defect, std::abs(trace_raised(ids.K[p], ids.g.ginv(p), d) - data.tau[p]));
    }

    if (data.em) {
        const double ep = -k.tau_power().to_double();
        const std::vector<Vec3> df = f.empty() ? std::vector<Vec3>(N, Vec3{}) : gradient(c, f);
        ids.E.assign(N, Vec3{});
        for (std::size_t p = 0; p < N; ++p) {
            const double s = std::pow(phi[p], ep);
            for (int i = 0; i < d; ++i) {
                double v = 0.0;
                for (int j = 0; j < d; ++j) {
                    const auto sj = static_cast<std::size_t>(j);
                    v += at(gamma.ginv(p), i, j) * (df[p][sj] + data.em->V[p][sj]);
                }
                ids.E[p][static_cast<std::size_t>(i)] = s * v;
            }
        }
        ids.F = data.em->F;
    }
    return ids;
}

std::vector<double> physical_energy(const std::vector<double>& phi, const ConformalData& data,
                                    const ConformalConstants& k) {
    const int n = k.n;
    const double p2 = -4.0 * (n - 1) / (n - 2.0);
    const double p3 = -8.0 / (n - 2.0);
    std::vector<double> e(phi.size());
    for (std::size_t p = 0; p < phi.size(); ++p)
        e[p] = data.eps1[p] + data.eps2[p] * std::pow(phi[p], p2) + data.eps3[p] * std::pow(phi[p], p3);
    return e;
}

std::vector<Vec3> physical_momentum(const std::vector<double>& phi, const ConformalData& data,
                                    const ConformalConstants& k) {
    const int n = k.n;
    const double p1 = 2.0 / (n - 2.0);
    const double p2 = -2.0 * n / (n - 2.0);
    std::vector<Vec3> J(phi.size(), Vec3{});
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double a = std::pow(phi[p], p1), b = std::pow(phi[p], p2);
        for (std::size_t i = 0; i < 3; ++i) J[p][i] = a * data.omega1[p][i] - b * data.omega2[p][i];
    }
    return J;
}

ResidualReport constraint_residuals(const InitialDataSet& ids, const std::vector<double>& phi,
                                    const ConformalData& data, const ConformalConstants& k,
                                    const ResidualOptions& opt) {
    const MetricField& g = ids.g;
    const GridChart& c = g.chart();
    const int d = c.dim();
    if (d != k.n) throw PreconditionError("constraint residuals need the chart dimension to equal n");
    const std::size_t N = c.node_count();
    const CurvaturePack cv = curvature(g);
    const std::vector<double> eps = physical_energy(phi, data, k);
    const std::vector<Vec3> J = physical_momentum(phi, data, k);
    const double a_n = k.a_n().to_double();
    const double crit = k.critical().to_double();
    const double fp = -k.tau_power().to_double();
    const std::vector<std::uint8_t> mask = measured_mask(c, opt.boundary_layer);

    ResidualReport r;
    r.hamiltonian.assign(N, 0.0);
    r.momentum.assign(N, Vec3{});
    if (!ids.E.empty()) r.em.assign(N, 0.0);

    std::vector<double> sqrtE;  // √g E^i, interleaved
    if (!ids.E.empty()) {
        sqrtE.resize(3 * N);
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t i = 0; i < 3; ++i) sqrtE[3 * p + i] = g.sqrt_det(p) * ids.E[p][i];
    }

    auto add_norm = [](FieldNorms& n, double v, double w) {
        n.linf = std::max(n.linf, std::abs(v));
        n.l2 += w * v * v;
    };
    for (std::size_t p = 0; p < N; ++p) {
        if (!mask[p]) continue;
        ++r.measured;
        const Mat3& gi = g.ginv(p);
        const double w = c.cell_volume() * g.sqrt_det(p);
        const double k2 = contract_raised(ids.K[p], ids.K[p], gi, d);
        double h = cv.scalar[p] + data.tau[p] * data.tau[p] - k2 - 2.0 * eps[p] - 2.0 * opt.cosmological;
        if (!data.force_phi.empty()) h += a_n * data.force_phi[p] * std::pow(phi[p], -crit);
        r.hamiltonian[p] = h;
        add_norm(r.hamiltonian_norm, h, w);

        Mat3 dK[3];
        for (int a = 0; a < d; ++a) dK[a] = derivative(c, std::span<const Mat3>(ids.K), p, a);
        const double s = std::pow(phi[p], fp);
        Vec3 m{};
        for (int j = 0; j < d; ++j) {
            double v = 0.0;
            for (int i = 0; i < d; ++i)
                for (int kk = 0; kk < d; ++kk) {
                    double t = at(dK[kk], i, j);
                    for (int l = 0; l < d; ++l)
                        t -= cv.gamma(p, l, kk, i) * at(ids.K[p], l, j) + cv.gamma(p, l, kk, j) * at(ids.K[p], i, l);
                    v += at(gi, i, kk) * t;
                }
            const auto sj = static_cast<std::size_t>(j);
            v -= data.dtau[p][sj] + J[p][sj];
            if (!data.force_X.empty()) v -= s * data.force_X[p][sj];
            m[sj] = v;
        }
        r.momentum[p] = m;
        add_norm(r.momentum_norm, covector_norm(gi, m, d), w);

        if (!ids.E.empty()) {
            double div = 0.0;
            for (int a = 0; a < d; ++a) div += derivative(c, sqrtE, 3, static_cast<std::size_t>(a), p, a);
            double e = div / g.sqrt_det(p) - data.em->q[p];
            if (!data.force_f.empty()) e -= s * data.force_f[p];
            r.em[p] = e;
            add_norm(r.em_norm, e, w);
        }
    }
    r.hamiltonian_norm.l2 = std::sqrt(r.hamiltonian_norm.l2);
    r.momentum_norm.l2 = std::sqrt(r.momentum_norm.l2);
    r.em_norm.l2 = std::sqrt(r.em_norm.l2);
    return r;
}

MmsFields mms_forcing(const ContinuumMetric& metric, const GridChart& chart, const MmsTargets& targets,
                      const ConformalData& data, const ConformalConstants& k) {
    const int d = chart.dim();
    if (metric.dim() != d) throw ConfigError("mms_forcing: metric and chart dimensions differ");
    const std::size_t N = chart.node_count();
    const double c_n = k.c_n().to_double(), b_n = k.b_n().to_double(), r_n = k.r_n().to_double();
    const double crit = k.critical().to_double(), kp = k.k_power().to_double();
    const double e2p = k.eps2_power().to_double(), e3p = k.eps3_power().to_double();
    const double tp = k.tau_power().to_double(), wp = k.omega1_power().to_double();
    const bool em = data.em.has_value() && targets.f.has_value();

    MmsFields m;
    m.phi.resize(N);
    m.X.assign(N, Vec3{});
    m.force_phi.resize(N);
    m.force_X.assign(N, Vec3{});
    if (targets.f) {
        m.f.resize(N);
        m.force_f.resize(N);
    }
    for (std::size_t p = 0; p < N; ++p) {
        const Vec3 x = chart.coord(p);
        const Frame F = metric.frame(x);
        Mat3 ginv{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) at(ginv, i, j) = F.Ginv(i, j);

        const Jet phi = targets.phi.jet(x);
        if (!(phi.v > 0.0)) throw DomainError("mms_forcing: target phi is not positive at node " + std::to_string(p));
        std::array<Jet, 3> X;
        for (std::size_t i = 0; i < 3; ++i) X[i] = static_cast<int>(i) < d ? targets.X[i].jet(x) : Jet::constant(0.0);
        m.phi[p] = phi.v;
        for (std::size_t i = 0; i < 3; ++i) m.X[p][i] = X[i].v;

        double eps2 = data.eps2[p];
        Vec3 omega2 = data.omega2[p];
        if (targets.f) {
            const Jet f = targets.f->jet(x);
            m.f[p] = f.v;
            const double q = data.em ? data.em->q[p] : 0.0;
            m.force_f[p] = laplace_beltrami(F, f) - q * std::pow(phi.v, tp);
            if (em) {
                Vec3 Et{}, Eu{};
                for (int i = 0; i < d; ++i)
                    Et[static_cast<std::size_t>(i)] = f.g[static_cast<std::size_t>(i)] + data.em->V[p][static_cast<std::size_t>(i)];
                double e2 = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        Eu[static_cast<std::size_t>(i)] += F.Ginv(i, j) * Et[static_cast<std::size_t>(j)];
                        e2 += F.Ginv(i, j) * Et[static_cast<std::size_t>(i)] * Et[static_cast<std::size_t>(j)];
                    }
                eps2 += 0.5 * e2;
                for (int kk = 0; kk < d; ++kk)
                    for (int i = 0; i < d; ++i)
                        omega2[static_cast<std::size_t>(kk)] += at(data.em->F[p], i, kk) * Eu[static_cast<std::size_t>(i)];
            }
        }

        Mat3 Kt = conformal_killing(F, X);
        for (std::size_t e = 0; e < 9; ++e) Kt[e] += data.U[p][e];
        const double k2 = contract_raised(Kt, Kt, ginv, d);
        const double R = scalar_curvature(F);
        const double t2 = data.tau[p] * data.tau[p];
        const double h = c_n * R * phi.v + b_n * t2 * std::pow(phi.v, crit) - c_n * k2 * std::pow(phi.v, kp) -
                         2.0 * c_n * data.eps1[p] * std::pow(phi.v, crit) - 2.0 * c_n * eps2 * std::pow(phi.v, e2p) -
                         2.0 * c_n * data.eps3[p] * std::pow(phi.v, e3p);
        m.force_phi[p] = laplace_beltrami(F, phi) - h;

        const Vec3 lx = conformal_killing_laplacian(F, X);
        const double ft = r_n * std::pow(phi.v, tp), fw = std::pow(phi.v, wp);
        for (int i = 0; i < d; ++i) {
            const auto s = static_cast<std::size_t>(i);
            m.force_X[p][s] = lx[s] - (ft * data.dtau[p][s] + fw * data.omega1[p][s] - omega2[s]);
        }
    }
    return m;
}

void apply_mms(ConformalData& data, const MmsFields& mms) {
    data.force_phi = mms.force_phi;
    data.force_X = mms.force_X;
    data.bc_u = mms.phi;
    data.bc_v = mms.X;
    if (!mms.f.empty()) {
        data.force_f = mms.force_f;
        data.bc_w = mms.f;
    }
}

ConvergenceTable convergence_study(const std::function<std::vector<double>(int)>& run,
                                   const std::vector<int>& resolutions, std::vector<std::string> fields,
                                   bool periodic) {
    if (resolutions.size() < 2) throw PreconditionError("convergence_study: needs at least two resolutions");
    if (std::set<int>(resolutions.begin(), resolutions.end()).size() != resolutions.size())
        throw PreconditionError("convergence_study: resolutions must be distinct");
    for (int r : resolutions)
        if (r < 3) throw PreconditionError("convergence_study: resolutions need at least 3 nodes");
    ConvergenceTable t;
    t.resolutions = resolutions;
    t.fields = std::move(fields);
    for (int r : resolutions) {
        std::vector<double> e = run(r);
        if (e.size() != t.fields.size()) throw ConfigError("convergence_study: run returned the wrong field count");
        t.errors.push_back(std::move(e));
    }
    for (std::size_t i = 0; i + 1 < resolutions.size(); ++i) {
        const int shift = periodic ? 0 : 1;
        const double hr = static_cast<double>(resolutions[i + 1] - shift) / (resolutions[i] - shift);
        std::vector<double> o(t.fields.size());
        for (std::size_t f = 0; f < o.size(); ++f) o[f] = std::log(t.errors[i][f] / t.errors[i + 1][f]) / std::log(hr);
        t.orders.push_back(std::move(o));
    }
    return t;
}

}  // namespace cforge

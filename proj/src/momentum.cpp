#include "cforge/momentum.hpp"

#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

std::vector<Vec3> momentum_rhs(const std::vector<double>& phi, const ConformalData& data,
                               const ConformalConstants& k, int dim) {
    const double r_n = k.r_n().to_double();
    const double pt = k.tau_power().to_double();
    const double pw = k.omega1_power().to_double();
    std::vector<Vec3> rhs(phi.size(), Vec3{});
    for (std::size_t p = 0; p < phi.size(); ++p) {
        if (!(phi[p] > 0.0)) throw DomainError("momentum_rhs: phi is not positive at node " + std::to_string(p));
        const double ft = r_n * std::pow(phi[p], pt);
        const double fw = std::pow(phi[p], pw);
        for (int i = 0; i < dim; ++i) {
            const auto s = static_cast<std::size_t>(i);
            rhs[p][s] = ft * data.dtau[p][s] + fw * data.omega1[p][s] - data.omega2[p][s];
        }
    }
    return rhs;
}

double vector_l2(const DiscreteOperator& ckl, const MetricField& metric, const std::vector<Vec3>& X) {
    const int d = metric.dim();
    double s = 0.0;
    const auto& dofs = ckl.domain.dof_nodes();
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const std::size_t p = dofs[i];
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                s += ckl.mass[i] * at(metric.g(p), a, b) * X[p][static_cast<std::size_t>(a)] *
                     X[p][static_cast<std::size_t>(b)];
    }
    return std::sqrt(s);
}

double covector_l2(const DiscreteOperator& ckl, const MetricField& metric, const std::vector<Vec3>& w) {
    const int d = metric.dim();
    double s = 0.0;
    const auto& dofs = ckl.domain.dof_nodes();
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const std::size_t p = dofs[i];
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                s += ckl.mass[i] * at(metric.ginv(p), a, b) * w[p][static_cast<std::size_t>(a)] *
                     w[p][static_cast<std::size_t>(b)];
    }
    return std::sqrt(s);
}

MomentumSolution solve_momentum(const DiscreteOperator& ckl, const MetricField& metric,
                                const std::vector<Vec3>& rhs, const std::vector<Vec3>& bc,
                                const MomentumOptions& opt, const std::vector<Vec3>* warm) {
    if (ckl.kind != BlockKind::vector) throw ConfigError("solve_momentum: needs the conformal Killing Laplacian");
    if (opt.lambda1 && !(*opt.lambda1 > 0.0))
        throw SpectralError("solve_momentum: lambda1_conf = " + std::to_string(*opt.lambda1) +
                            " is not positive; the conformal Killing Laplacian is singular");
    const int d = metric.dim();
    const std::vector<double> full_rhs = flatten(rhs, d);
    const std::vector<double> f = ckl.gather(full_rhs);
    const std::vector<double> b = bc.empty() ? std::vector<double>{} : flatten(bc, d);
    std::vector<double> w;
    if (warm && !warm->empty()) w = flatten(*warm, d);

    MomentumSolution s;
    const std::vector<double> x = solve_dirichlet(ckl, {}, f, b, opt.linear, w, &s.report);
    s.X = unflatten(x, d);
    s.LX = conformal_killing_operator(metric, s.X);

    s.norm_X = vector_l2(ckl, metric, s.X);
    s.norm_rhs = covector_l2(ckl, metric, rhs);
    s.norm_LX = std::sqrt(2.0 * [&] {
        // X^T K X equals ½‖£X‖² of the quadrature when the boundary data vanish.
        const std::vector<double> xd = ckl.gather(x);
        std::vector<double> kx(xd.size(), 0.0);
        ckl.stiffness.multiply(xd, kx);
        ckl.coupling.multiply_add(x, kx);
        return std::max(0.0, dot(xd, kx));
    }());

    const std::vector<double> lx = ckl.apply(x);
    double r2 = 0.0, f2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = ckl.mass[i / static_cast<std::size_t>(d)];
        r2 += m * (lx[i] - f[i]) * (lx[i] - f[i]);
        f2 += m * f[i] * f[i];
    }
    s.residual = f2 > 0.0 ? std::sqrt(r2 / f2) : std::sqrt(r2);

    bool zero_bc = true;
    for (double v : b) zero_bc = zero_bc && v == 0.0;
    s.lambda1 = opt.lambda1 ? *opt.lambda1 : std::nan("");
    if (opt.lambda1 && zero_bc) {
        s.bound_checked = true;
        s.bound_holds = s.norm_X <= s.norm_rhs / *opt.lambda1 * (1.0 + 1e-6) + 1e-14;
    }
    return s;
}

}  // namespace cforge

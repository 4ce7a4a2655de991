#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "cforge/geometry.hpp"
#include "cforge/operators.hpp"
#include "cforge/sparse.hpp"

namespace cforge::test {

inline GridChart box(int dim, int nodes, double extent = 1.0) {
    return GridChart::build(dim, std::vector<double>(static_cast<std::size_t>(dim), extent),
                            std::vector<int>(static_cast<std::size_t>(dim), nodes),
                            std::vector<BoundaryKind>(static_cast<std::size_t>(dim), BoundaryKind::dirichlet));
}

inline GridChart torus(int dim, int nodes, double extent = 1.0) {
    return GridChart::build(dim, std::vector<double>(static_cast<std::size_t>(dim), extent),
                            std::vector<int>(static_cast<std::size_t>(dim), nodes),
                            std::vector<BoundaryKind>(static_cast<std::size_t>(dim), BoundaryKind::periodic));
}

inline MetricField flat(const GridChart& c) { return metric_from_generator(c, MetricSpec{}); }

inline MetricField conformal(const GridChart& c, const char* psi, int n = 3) {
    MetricSpec s;
    s.kind = MetricGenerator::conformally_flat;
    s.psi = Expression::parse(psi);
    s.conformal_n = n;
    return metric_from_generator(c, s);
}

inline Eigen::MatrixXd dense(const CsrMatrix& A) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(A.rows()), static_cast<Eigen::Index>(A.cols()));
    const auto& ptr = A.row_ptr();
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t k = ptr[r]; k < ptr[r + 1]; ++k)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(A.col_index()[k])) = A.values()[k];
    return M;
}

/// Smallest generalized eigenvalue of K v = μ G v (G symmetric positive definite).
inline double dense_smallest(const CsrMatrix& K, const CsrMatrix& G) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(K), dense(G));
    return es.eigenvalues().minCoeff();
}

inline std::vector<double> node_field(const GridChart& c, double (*f)(const Vec3&)) {
    std::vector<double> v(c.node_count());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = f(c.coord(p));
    return v;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace cforge::test

#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cforge {

/// Sets the worker count used by row-parallel kernels (1 = serial).
void set_thread_count(int n);
int thread_count();

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
public:
    struct Triplet {
        std::size_t row, col;
        double value;
    };

    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), ptr_(rows + 1, 0) {}
    /// Duplicate entries are summed; explicit zeros are dropped.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return val_.size(); }
    const std::vector<std::size_t>& row_ptr() const { return ptr_; }
    const std::vector<std::size_t>& col_index() const { return col_; }
    const std::vector<double>& values() const { return val_; }

    /// y = A x.
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y += A x.
    void multiply_add(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    double at(std::size_t r, std::size_t c) const;
    double max_abs() const;
    /// max |A_ij − A_ji|.
    double symmetry_defect() const;
    /// A + diag(d).
    CsrMatrix plus_diagonal(std::span<const double> d) const;
    /// Writes "row col value" lines with full precision.
    void write_triplets(std::ostream& os) const;

    /// Appends the next row; columns may be unsorted and repeated (repeats are summed).
    void push_row(std::vector<std::pair<std::size_t, double>> entries);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> ptr_{0};
    std::vector<std::size_t> col_;
    std::vector<double> val_;
    std::size_t filled_rows_ = 0;
};

enum class SolverMethod { automatic, cg, bicgstab };

struct LinearSolveOptions {
    double tol = 1e-10;
    /// 0 selects 20·√DOF.
    int max_iter = 0;
    SolverMethod method = SolverMethod::automatic;
    /// Treat the matrix as symmetric positive definite when method is automatic.
    bool symmetric = true;
};

struct LinearSolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    std::string method;
    bool converged = false;
};

struct LinearSolveResult {
    std::vector<double> x;
    LinearSolveReport report;
};

/// Jacobi-preconditioned CG (symmetric) or BiCGSTAB (general) solve of A x = b.
/// Throws SolverError on iteration exhaustion and SingularOperatorError when
/// CG meets a search direction of vanishing curvature with residual left.
LinearSolveResult solve_linear(const CsrMatrix& A, std::span<const double> b,
                               std::span<const double> x0 = {},
                               const LinearSolveOptions& opt = {});

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace cforge

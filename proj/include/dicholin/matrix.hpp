#pragma once

#include <vector>

#include "dicholin/error.hpp"
#include "dicholin/vec.hpp"

namespace dicholin {

/// Relative pivot floor below which an LU factorization counts as singular:
/// the smallest pivot must exceed kPivotRelTol times the largest.
inline constexpr double kPivotRelTol = 1e-12;

struct Lu;

/// Small dense row-major matrix with just enough linear algebra for this
/// project: LU with partial pivoting, explicit inverse, p in {1, 2, inf}
/// operator norms (p = 2 via power iteration on the Gram matrix).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);

    static Matrix identity(int d);
    static Matrix diag(const std::vector<double>& d);
    /// Row-major nested initializer, e.g. {{1, 0}, {0, 2}}.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    [[nodiscard]] Matrix transpose() const;
    Matrix operator*(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix operator+(const Matrix& o) const;

    void apply(const double* x, double* y) const; // y = A x
    [[nodiscard]] std::vector<double> apply(const std::vector<double>& x) const;

    [[nodiscard]] double norm1() const;    // max column abs sum
    [[nodiscard]] double norm_inf() const; // max row abs sum
    /// Spectral norm by power iteration on A^T A; relative tolerance 1e-10,
    /// cap 10000 sweeps. Throws ConvergenceError carrying the last estimate.
    [[nodiscard]] double norm2() const;
    [[nodiscard]] double norm(Norm p) const;

    [[nodiscard]] double trace() const;

    /// LU with partial pivoting. Square matrices only.
    [[nodiscard]] Lu factor() const;

    /// Explicit inverse via LU solves on basis vectors. Throws SingularError
    /// (with the pivot ratio) if the factorization fails the pivot floor.
    [[nodiscard]] Matrix inverse() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// Result of Matrix::factor().
struct Lu {
    Matrix lu;                   // packed L (unit diagonal) and U
    std::vector<int> perm;       // row permutation
    double min_pivot = 0.0;      // smallest |pivot|
    double max_pivot = 0.0;      // largest |pivot|
    [[nodiscard]] bool invertible(double rel_tol = kPivotRelTol) const;
    [[nodiscard]] std::vector<double> solve(const std::vector<double>& rhs) const;
};

} // namespace dicholin

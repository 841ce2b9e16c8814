#include "dicholin/matrix.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace dicholin {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw ShapeError("matrix needs positive dimensions");
    a_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Matrix Matrix::identity(int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows_; ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ShapeError("matrix needs positive dimensions");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows_; ++i) {
        if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != m.cols_)
            throw ShapeError("ragged matrix rows");
        for (int j = 0; j < m.cols_; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw ShapeError("matrix product shape mismatch");
    Matrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
        }
    return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix sum shape mismatch");
    Matrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
}

Matrix Matrix::operator+(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix sum shape mismatch");
    Matrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
}

void Matrix::apply(const double* x, double* y) const {
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        const double* row = a_.data() + static_cast<size_t>(i) * cols_;
        for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_) throw ShapeError("matrix-vector shape mismatch");
    std::vector<double> y(static_cast<size_t>(rows_));
    apply(x.data(), y.data());
    return y;
}

double Matrix::norm1() const {
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Matrix::norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Matrix::norm2() const {
    // Largest eigenvalue of G = A^T A by power iteration. The start vector has
    // all-positive entries plus a mild index-dependent tilt so it is not
    // orthogonal to the leading eigenspace of any G arising from real data.
    const Matrix g = transpose() * (*this);
    const int d = g.rows();
    std::vector<double> v(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) v[static_cast<size_t>(i)] = 1.0 + 0.25 * (i + 1) / static_cast<double>(d);
    double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= nv;

    constexpr int kCap = 10000;
    constexpr double kRelTol = 1e-10;
    double est = 0.0;
    std::vector<double> w(static_cast<size_t>(d));
    for (int it = 0; it < kCap; ++it) {
        g.apply(v.data(), w.data());
        double ray = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
        double nw = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        if (nw == 0.0) return 0.0; // A = 0
        for (int i = 0; i < d; ++i) v[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] / nw;
        double prev = est;
        est = ray;
        if (it > 0 && std::abs(est - prev) <= kRelTol * std::max(est, 1e-30))
            return std::sqrt(std::max(est, 0.0));
    }
    throw ConvergenceError("spectral norm power iteration hit cap; last estimate " +
                           std::to_string(std::sqrt(std::max(est, 0.0))));
}

double Matrix::norm(Norm p) const {
    switch (p) {
    case Norm::One: return norm1();
    case Norm::Two: return norm2();
    case Norm::Inf: return norm_inf();
    }
    return 0.0;
}

double Matrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

Lu Matrix::factor() const {
    if (rows_ != cols_) throw ShapeError("LU needs a square matrix");
    Lu f;
    f.lu = *this;
    f.perm.resize(static_cast<size_t>(rows_));
    std::iota(f.perm.begin(), f.perm.end(), 0);
    const int n = rows_;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            double c = std::abs(f.lu(i, k));
            if (c > best) { best = c; piv = i; }
        }
        if (piv != k) {
            std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
            for (int j = 0; j < n; ++j) {
                double t = f.lu(k, j);
                f.lu(k, j) = f.lu(piv, j);
                f.lu(piv, j) = t;
            }
        }
        double pk = f.lu(k, k);
        double apk = std::abs(pk);
        f.max_pivot = std::max(f.max_pivot, apk);
        f.min_pivot = (k == 0) ? apk : std::min(f.min_pivot, apk);
        if (pk == 0.0) continue; // exactly singular; pivot stats record it
        for (int i = k + 1; i < n; ++i) {
            double m = f.lu(i, k) / pk;
            f.lu(i, k) = m;
            if (m == 0.0) continue;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}

bool Lu::invertible(double rel_tol) const {
    return max_pivot > 0.0 && min_pivot > rel_tol * max_pivot;
}

std::vector<double> Lu::solve(const std::vector<double>& rhs) const {
    const int n = lu.rows();
    if (static_cast<int>(rhs.size()) != n) throw ShapeError("LU solve shape mismatch");
    std::vector<double> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = rhs[static_cast<size_t>(perm[static_cast<size_t>(i)])];
        for (int j = 0; j < i; ++j) s -= lu(i, j) * y[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= lu(i, j) * y[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s / lu(i, i);
    }
    return y;
}

Matrix Matrix::inverse() const {
    Lu f = factor();
    if (!f.invertible()) {
        double ratio = f.max_pivot > 0.0 ? f.min_pivot / f.max_pivot : 0.0;
        throw SingularError("matrix fails invertibility floor: pivot ratio " +
                            std::to_string(ratio) + " <= " + std::to_string(kPivotRelTol));
    }
    const int n = rows_;
    Matrix inv(n, n);
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<size_t>(j)] = 1.0;
        std::vector<double> col = f.solve(e);
        e[static_cast<size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) inv(i, j) = col[static_cast<size_t>(i)];
    }
    return inv;
}

} // namespace dicholin

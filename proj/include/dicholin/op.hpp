#pragma once

#include <memory>
#include <vector>

#include "dicholin/matrix.hpp"
#include "dicholin/vec.hpp"

namespace dicholin {

/// Weight rule n -> w_n for a bilateral weighted left shift: explicit weights
/// on [n_min, n_min + window.size() - 1], constant extension outside (the
/// boundary values repeat). Invertibility needs inf |w_n| > 0, which the
/// finite description makes checkable.
struct WeightRule {
    long n_min = 0;
    std::vector<double> window;

    static WeightRule constant(double w) { return {0, {w}}; }
    /// Two-sided rule: w_n = left for n <= crossing, right for n >= crossing + 1.
    static WeightRule two_sided(double left, double right, long crossing = 0) {
        return {crossing, {left, right}};
    }

    [[nodiscard]] double at(long n) const;
    [[nodiscard]] double sup_abs() const;
    [[nodiscard]] double inf_abs() const;
};

/// An invertible bounded operator on the problem's state space. Four closed
/// forms and nothing else:
///   scaled identity          s * Id           (dense or bilateral)
///   dense matrix             A in R^{d x d}
///   weighted left shift      (S_w x)_n = w_{n+1} x_{n+1}   (bilateral space)
///   block diagonal           diag(B_1, ..., B_k) of dense-dimension blocks
///
/// Construction checks invertibility (LU pivot floor for dense, weight floor
/// for shifts, s != 0) and caches the dense inverse, so apply_inverse and
/// inv_norm are always available on a live object.
class Op {
public:
    enum class Kind { ScaledIdentity, Dense, Shift, BlockDiag };

    /// dim = 0 makes the operator shape-generic (usable on either space);
    /// a positive dim pins it to R^dim, which block_diag requires.
    static Op scaled_identity(double s, int dim = 0);
    static Op dense(Matrix m);
    static Op shift(WeightRule w);
    static Op block_diag(std::vector<Op> blocks);

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Dense dimension; 0 when shape-generic or bilateral.
    [[nodiscard]] int dense_dim() const { return dim_; }
    [[nodiscard]] bool acts_on_biseq() const { return kind_ == Kind::Shift; }

    [[nodiscard]] Vec apply(const Vec& v) const;
    [[nodiscard]] Vec apply_inverse(const Vec& v) const;

    /// Operator p-norm. Exact for every variant except dense p = 2 (power
    /// iteration, relative tolerance 1e-10).
    [[nodiscard]] double op_norm(Norm p) const;
    /// p-norm of the inverse operator.
    [[nodiscard]] double inv_norm(Norm p) const;

    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] const Matrix& matrix() const;
    [[nodiscard]] const Matrix& inverse_matrix() const;
    [[nodiscard]] const WeightRule& weights() const;
    [[nodiscard]] const std::vector<Op>& blocks() const { return blocks_; }

private:
    Kind kind_ = Kind::ScaledIdentity;
    int dim_ = 0;
    double scale_ = 1.0;
    std::shared_ptr<const Matrix> mat_, inv_;
    WeightRule w_;
    std::vector<Op> blocks_;
};

} // namespace dicholin

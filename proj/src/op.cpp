#include "dicholin/op.hpp"

#include <cmath>
#include <string>

namespace dicholin {

double WeightRule::at(long n) const {
    long hi = n_min + static_cast<long>(window.size()) - 1;
    long k = n < n_min ? n_min : (n > hi ? hi : n);
    return window[static_cast<size_t>(k - n_min)];
}

double WeightRule::sup_abs() const {
    double best = 0.0;
    for (double w : window) best = std::max(best, std::abs(w));
    return best;
}

double WeightRule::inf_abs() const {
    double best = std::abs(window.front());
    for (double w : window) best = std::min(best, std::abs(w));
    return best;
}

Op Op::scaled_identity(double s, int dim) {
    if (s == 0.0) throw SingularError("scaled identity with s = 0 is not invertible");
    if (dim < 0) throw ShapeError("negative dimension");
    Op o;
    o.kind_ = Kind::ScaledIdentity;
    o.scale_ = s;
    o.dim_ = dim;
    return o;
}

Op Op::dense(Matrix m) {
    if (m.rows() != m.cols()) throw ShapeError("dense operator needs a square matrix");
    Op o;
    o.kind_ = Kind::Dense;
    o.dim_ = m.rows();
    o.inv_ = std::make_shared<const Matrix>(m.inverse()); // throws SingularError if degenerate
    o.mat_ = std::make_shared<const Matrix>(std::move(m));
    return o;
}

Op Op::shift(WeightRule w) {
    if (w.window.empty()) throw ShapeError("weight rule needs at least one weight");
    if (w.inf_abs() <= 0.0)
        throw SingularError("weighted shift needs inf |w_n| > 0");
    if (!std::isfinite(w.sup_abs()))
        throw SingularError("weighted shift needs sup |w_n| < inf");
    Op o;
    o.kind_ = Kind::Shift;
    o.w_ = std::move(w);
    return o;
}

Op Op::block_diag(std::vector<Op> blocks) {
    if (blocks.empty()) throw ShapeError("block diagonal needs at least one block");
    int dim = 0;
    for (const Op& b : blocks) {
        if (b.dense_dim() == 0)
            throw ShapeError("block diagonal blocks need a definite dense dimension");
        dim += b.dense_dim();
    }
    Op o;
    o.kind_ = Kind::BlockDiag;
    o.dim_ = dim;
    o.blocks_ = std::move(blocks);
    return o;
}

const Matrix& Op::matrix() const {
    if (kind_ != Kind::Dense) throw ShapeError("matrix() on a non-dense operator");
    return *mat_;
}

const Matrix& Op::inverse_matrix() const {
    if (kind_ != Kind::Dense) throw ShapeError("inverse_matrix() on a non-dense operator");
    return *inv_;
}

const WeightRule& Op::weights() const {
    if (kind_ != Kind::Shift) throw ShapeError("weights() on a non-shift operator");
    return w_;
}

namespace {

void check_dense_dim(const Op& o, const Vec& v) {
    if (!v.is_dense())
        throw ShapeError("operator on dense space applied to " + v.shape_name());
    if (o.dense_dim() != 0 && v.dim() != o.dense_dim())
        throw ShapeError("operator dimension " + std::to_string(o.dense_dim()) +
                         " vs vector " + v.shape_name());
}

} // namespace

Vec Op::apply(const Vec& v) const {
    switch (kind_) {
    case Kind::ScaledIdentity: {
        if (dim_ != 0) check_dense_dim(*this, v);
        Vec r = v;
        r *= scale_;
        return r;
    }
    case Kind::Dense: {
        check_dense_dim(*this, v);
        return Vec::dense(mat_->apply(v.data()));
    }
    case Kind::Shift: {
        if (v.is_dense()) throw ShapeError("weighted shift applied to " + v.shape_name());
        std::map<long, double> out;
        for (const auto& [n, x] : v.entries()) out[n - 1] = w_.at(n) * x;
        return Vec::sparse(std::move(out));
    }
    case Kind::BlockDiag: {
        check_dense_dim(*this, v);
        std::vector<double> out;
        out.reserve(static_cast<size_t>(dim_));
        size_t off = 0;
        const auto& x = v.data();
        for (const Op& b : blocks_) {
            auto d = static_cast<size_t>(b.dense_dim());
            Vec part = b.apply(Vec::dense({x.begin() + static_cast<long>(off),
                                           x.begin() + static_cast<long>(off + d)}));
            out.insert(out.end(), part.data().begin(), part.data().end());
            off += d;
        }
        return Vec::dense(std::move(out));
    }
    }
    throw Error("unreachable");
}

Vec Op::apply_inverse(const Vec& v) const {
    switch (kind_) {
    case Kind::ScaledIdentity: {
        if (dim_ != 0) check_dense_dim(*this, v);
        Vec r = v;
        r *= 1.0 / scale_;
        return r;
    }
    case Kind::Dense: {
        check_dense_dim(*this, v);
        return Vec::dense(inv_->apply(v.data()));
    }
    case Kind::Shift: {
        if (v.is_dense()) throw ShapeError("weighted shift applied to " + v.shape_name());
        // (S_w^{-1} y)_n = y_{n-1} / w_n
        std::map<long, double> out;
        for (const auto& [n, y] : v.entries()) out[n + 1] = y / w_.at(n + 1);
        return Vec::sparse(std::move(out));
    }
    case Kind::BlockDiag: {
        check_dense_dim(*this, v);
        std::vector<double> out;
        out.reserve(static_cast<size_t>(dim_));
        size_t off = 0;
        const auto& x = v.data();
        for (const Op& b : blocks_) {
            auto d = static_cast<size_t>(b.dense_dim());
            Vec part = b.apply_inverse(Vec::dense({x.begin() + static_cast<long>(off),
                                                   x.begin() + static_cast<long>(off + d)}));
            out.insert(out.end(), part.data().begin(), part.data().end());
            off += d;
        }
        return Vec::dense(std::move(out));
    }
    }
    throw Error("unreachable");
}

double Op::op_norm(Norm p) const {
    switch (kind_) {
    case Kind::ScaledIdentity: return std::abs(scale_);
    case Kind::Dense: return mat_->norm(p);
    case Kind::Shift: return w_.sup_abs(); // diagonal-times-shift: sup |w| for every p
    case Kind::BlockDiag: {
        double best = 0.0;
        for (const Op& b : blocks_) best = std::max(best, b.op_norm(p));
        return best;
    }
    }
    return 0.0;
}

double Op::inv_norm(Norm p) const {
    switch (kind_) {
    case Kind::ScaledIdentity: return 1.0 / std::abs(scale_);
    case Kind::Dense: return inv_->norm(p);
    case Kind::Shift: return 1.0 / w_.inf_abs();
    case Kind::BlockDiag: {
        double best = 0.0;
        for (const Op& b : blocks_) best = std::max(best, b.inv_norm(p));
        return best;
    }
    }
    return 0.0;
}

} // namespace dicholin

#include "dicholin/projection.hpp"

#include <cmath>

namespace dicholin {

bool IndexPredicate::keeps(long i) const {
    switch (kind) {
    case Kind::LeqThreshold: return i <= threshold;
    case Kind::GeqThreshold: return i >= threshold;
    case Kind::All: return true;
    case Kind::None: return false;
    }
    return false;
}

IndexPredicate IndexPredicate::complement() const {
    switch (kind) {
    case Kind::LeqThreshold: return geq(threshold + 1);
    case Kind::GeqThreshold: return leq(threshold - 1);
    case Kind::All: return none();
    case Kind::None: return all();
    }
    return none();
}

IndexPredicate IndexPredicate::shifted(long delta) const {
    switch (kind) {
    case Kind::LeqThreshold: return leq(threshold + delta);
    case Kind::GeqThreshold: return geq(threshold + delta);
    default: return *this;
    }
}

bool IndexPredicate::operator==(const IndexPredicate& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::LeqThreshold || kind == Kind::GeqThreshold) return threshold == o.threshold;
    return true;
}

Projector Projector::dense(Matrix m) {
    if (m.rows() != m.cols()) throw ShapeError("projector matrix must be square");
    Projector p;
    Matrix comp = Matrix::identity(m.rows()) - m;
    p.dense_ = std::make_shared<const Matrix>(std::move(m));
    p.comp_ = std::make_shared<const Matrix>(std::move(comp));
    return p;
}

Projector Projector::indices(IndexPredicate pred) {
    Projector p;
    p.pred_ = pred;
    return p;
}

const Matrix& Projector::matrix() const {
    if (!dense_) throw ShapeError("matrix() on a coordinate projector");
    return *dense_;
}

const IndexPredicate& Projector::predicate() const {
    if (dense_) throw ShapeError("predicate() on a dense projector");
    return pred_;
}

Vec Projector::apply(const Vec& v) const {
    if (dense_) {
        if (!v.is_dense()) throw ShapeError("dense projector applied to " + v.shape_name());
        return Vec::dense(dense_->apply(v.data()));
    }
    if (v.is_dense()) throw ShapeError("coordinate projector applied to " + v.shape_name());
    std::map<long, double> kept;
    for (const auto& [i, x] : v.entries())
        if (pred_.keeps(i)) kept[i] = x;
    return Vec::sparse(std::move(kept));
}

Vec Projector::complement_apply(const Vec& v) const {
    if (dense_) {
        if (!v.is_dense()) throw ShapeError("dense projector applied to " + v.shape_name());
        return Vec::dense(comp_->apply(v.data()));
    }
    if (v.is_dense()) throw ShapeError("coordinate projector applied to " + v.shape_name());
    std::map<long, double> kept;
    for (const auto& [i, x] : v.entries())
        if (!pred_.keeps(i)) kept[i] = x;
    return Vec::sparse(std::move(kept));
}

double Projector::norm(Norm p) const {
    if (dense_) return dense_->norm(p);
    // Coordinate restriction: norm 1 unless it keeps nothing.
    return pred_.kind == IndexPredicate::Kind::None ? 0.0 : 1.0;
}

std::optional<int> Projector::rank() const {
    if (!dense_) return std::nullopt;
    return static_cast<int>(std::lround(dense_->trace()));
}

ProjectionFamily ProjectionFamily::constant(Projector p) {
    ProjectionFamily f;
    f.ps_.push_back(std::move(p));
    f.n_min_ = 0;
    return f;
}

ProjectionFamily ProjectionFamily::windowed(long n_min, std::vector<Projector> ps) {
    if (ps.empty()) throw ConfigError("projection window must be non-empty");
    ProjectionFamily f;
    f.ps_ = std::move(ps);
    f.n_min_ = n_min;
    return f;
}

const Projector& ProjectionFamily::at(long n) const {
    long hi = n_min_ + static_cast<long>(ps_.size()) - 1;
    long k = n < n_min_ ? n_min_ : (n > hi ? hi : n);
    return ps_[static_cast<size_t>(k - n_min_)];
}

std::pair<long, long> ProjectionFamily::canonical_window() const {
    return {n_min_, n_min_ + static_cast<long>(ps_.size()) - 1};
}

double ProjectionFamily::projection_bound(Norm p) const {
    double best = 0.0;
    for (const Projector& pr : ps_) best = std::max(best, pr.norm(p));
    return best;
}

} // namespace dicholin

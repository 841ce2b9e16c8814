#include "dicholin/vec.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

namespace dicholin {

namespace {
constexpr double kSparseDropTol = 1e-300;
}

std::string norm_name(Norm p) {
    switch (p) {
    case Norm::One: return "1";
    case Norm::Two: return "2";
    case Norm::Inf: return "inf";
    }
    return "?";
}

Vec Vec::dense(std::vector<double> entries) {
    if (entries.empty()) throw ShapeError("dense vector needs dimension >= 1");
    Vec v;
    v.dense_ = true;
    v.data_ = std::move(entries);
    return v;
}

Vec Vec::zeros(int dim) {
    if (dim < 1) throw ShapeError("dense vector needs dimension >= 1");
    return dense(std::vector<double>(static_cast<size_t>(dim), 0.0));
}

Vec Vec::unit(int dim, int i) {
    Vec v = zeros(dim);
    if (i < 0 || i >= dim) throw ShapeError("basis index out of range");
    v.data_[static_cast<size_t>(i)] = 1.0;
    return v;
}

Vec Vec::delta(long index, double value) {
    Vec v;
    v.dense_ = false;
    if (std::abs(value) > kSparseDropTol) v.sparse_[index] = value;
    return v;
}

Vec Vec::sparse(std::map<long, double> entries) {
    Vec v;
    v.dense_ = false;
    v.sparse_ = std::move(entries);
    for (auto it = v.sparse_.begin(); it != v.sparse_.end();) {
        if (std::abs(it->second) <= kSparseDropTol) it = v.sparse_.erase(it);
        else ++it;
    }
    return v;
}

Vec Vec::zero_sparse() {
    Vec v;
    v.dense_ = false;
    return v;
}

int Vec::dim() const {
    if (!dense_) throw ShapeError("dim() on a bilateral-sequence vector");
    return static_cast<int>(data_.size());
}

const std::vector<double>& Vec::data() const {
    if (!dense_) throw ShapeError("data() on a bilateral-sequence vector");
    return data_;
}

const std::map<long, double>& Vec::entries() const {
    if (dense_) throw ShapeError("entries() on a dense vector");
    return sparse_;
}

double Vec::at(long i) const {
    if (dense_) {
        if (i < 0 || i >= static_cast<long>(data_.size()))
            throw ShapeError("coordinate " + std::to_string(i) + " out of range for " + shape_name());
        return data_[static_cast<size_t>(i)];
    }
    auto it = sparse_.find(i);
    return it == sparse_.end() ? 0.0 : it->second;
}

void Vec::set(long i, double v) {
    if (dense_) {
        if (i < 0 || i >= static_cast<long>(data_.size()))
            throw ShapeError("coordinate " + std::to_string(i) + " out of range for " + shape_name());
        data_[static_cast<size_t>(i)] = v;
        return;
    }
    if (std::abs(v) <= kSparseDropTol) sparse_.erase(i);
    else sparse_[i] = v;
}

void Vec::check_same_shape(const Vec& o) const {
    if (dense_ != o.dense_ || (dense_ && data_.size() != o.data_.size()))
        throw ShapeError("shape mismatch: " + shape_name() + " vs " + o.shape_name());
}

void Vec::prune(long i) {
    auto it = sparse_.find(i);
    if (it != sparse_.end() && std::abs(it->second) <= kSparseDropTol) sparse_.erase(it);
}

Vec& Vec::operator+=(const Vec& o) {
    check_same_shape(o);
    if (dense_) {
        for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    } else {
        for (const auto& [i, v] : o.sparse_) {
            sparse_[i] += v;
            prune(i);
        }
    }
    return *this;
}

Vec& Vec::operator-=(const Vec& o) {
    check_same_shape(o);
    if (dense_) {
        for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    } else {
        for (const auto& [i, v] : o.sparse_) {
            sparse_[i] -= v;
            prune(i);
        }
    }
    return *this;
}

Vec& Vec::operator*=(double s) {
    if (dense_) {
        for (double& x : data_) x *= s;
    } else {
        for (auto it = sparse_.begin(); it != sparse_.end();) {
            it->second *= s;
            if (std::abs(it->second) <= kSparseDropTol) it = sparse_.erase(it);
            else ++it;
        }
    }
    return *this;
}

double Vec::norm(Norm p) const {
    double acc = 0.0;
    auto fold = [&](double x) {
        double a = std::abs(x);
        switch (p) {
        case Norm::One: acc += a; break;
        case Norm::Two: acc += a * a; break;
        case Norm::Inf: acc = std::max(acc, a); break;
        }
    };
    if (dense_) for (double x : data_) fold(x);
    else for (const auto& [i, v] : sparse_) fold(v);
    return p == Norm::Two ? std::sqrt(acc) : acc;
}

bool Vec::is_zero() const {
    if (dense_) {
        for (double x : data_) if (x != 0.0) return false;
        return true;
    }
    return sparse_.empty();
}

std::string Vec::shape_name() const {
    return dense_ ? "dense[" + std::to_string(data_.size()) + "]" : "biseq";
}

} // namespace dicholin

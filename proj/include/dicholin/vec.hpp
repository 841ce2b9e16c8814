#pragma once

#include <map>
#include <string>
#include <vector>

#include "dicholin/error.hpp"

namespace dicholin {

/// Which p-norm a problem uses. One experiment fixes one p for every vector and
/// operator norm it touches.
enum class Norm { One, Two, Inf };

std::string norm_name(Norm p);

/// A state vector: either a dense element of R^d or a finitely supported element
/// of the space of bounded bilateral sequences (indices range over all of Z).
///
/// Sparse entries with magnitude <= 1e-300 are dropped on write so supports stay
/// finite under repeated arithmetic.
class Vec {
public:
    Vec() = default;

    static Vec dense(std::vector<double> entries);
    static Vec zeros(int dim);
    /// Canonical basis vector e_i of R^dim (0-based i).
    static Vec unit(int dim, int i);
    /// delta_index in the bilateral-sequence space.
    static Vec delta(long index, double value = 1.0);
    static Vec sparse(std::map<long, double> entries);
    static Vec zero_sparse();

    [[nodiscard]] bool is_dense() const { return dense_; }
    [[nodiscard]] int dim() const; // dense only
    [[nodiscard]] const std::vector<double>& data() const;
    [[nodiscard]] const std::map<long, double>& entries() const;

    /// Coordinate read; dense vectors take 0 <= i < dim, sparse any integer.
    [[nodiscard]] double at(long i) const;
    void set(long i, double v);

    Vec& operator+=(const Vec& o);
    Vec& operator-=(const Vec& o);
    Vec& operator*=(double s);
    friend Vec operator+(Vec a, const Vec& b) { a += b; return a; }
    friend Vec operator-(Vec a, const Vec& b) { a -= b; return a; }
    friend Vec operator*(double s, Vec a) { a *= s; return a; }

    [[nodiscard]] double norm(Norm p) const;
    [[nodiscard]] bool is_zero() const;

    /// "dense[d]" or "biseq"; used in shape-mismatch messages.
    [[nodiscard]] std::string shape_name() const;

private:
    void check_same_shape(const Vec& o) const;
    void prune(long i);

    bool dense_ = true;
    std::vector<double> data_;
    std::map<long, double> sparse_;
};

} // namespace dicholin

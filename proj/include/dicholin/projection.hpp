#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dicholin/matrix.hpp"
#include "dicholin/vec.hpp"

namespace dicholin {

/// Which bilateral-sequence coordinates a coordinate projector keeps.
struct IndexPredicate {
    enum class Kind { LeqThreshold, GeqThreshold, All, None };
    Kind kind = Kind::All;
    long threshold = 0;

    static IndexPredicate leq(long t) { return {Kind::LeqThreshold, t}; }
    static IndexPredicate geq(long t) { return {Kind::GeqThreshold, t}; }
    static IndexPredicate all() { return {Kind::All, 0}; }
    static IndexPredicate none() { return {Kind::None, 0}; }

    [[nodiscard]] bool keeps(long i) const;
    [[nodiscard]] IndexPredicate complement() const;
    /// Set image under an index shift i -> i + delta.
    [[nodiscard]] IndexPredicate shifted(long delta) const;
    [[nodiscard]] bool operator==(const IndexPredicate& o) const;
};

/// One projection P: either a dense idempotent matrix on R^d or a coordinate
/// projector on the bilateral-sequence space that keeps an index set.
class Projector {
public:
    static Projector dense(Matrix m);
    static Projector indices(IndexPredicate pred);

    [[nodiscard]] bool is_dense() const { return dense_ != nullptr; }
    [[nodiscard]] const Matrix& matrix() const;
    [[nodiscard]] const IndexPredicate& predicate() const;

    [[nodiscard]] Vec apply(const Vec& v) const;            // P v
    [[nodiscard]] Vec complement_apply(const Vec& v) const; // (Id - P) v
    [[nodiscard]] double norm(Norm p) const;

    /// Rank of a dense projector (rounded trace; exact for idempotents).
    /// Coordinate projectors have no finite rank and return nullopt.
    [[nodiscard]] std::optional<int> rank() const;

private:
    std::shared_ptr<const Matrix> dense_, comp_;
    IndexPredicate pred_;
};

/// Rule n -> P_n: constant, or an explicit window with constant extension.
class ProjectionFamily {
public:
    static ProjectionFamily constant(Projector p);
    static ProjectionFamily windowed(long n_min, std::vector<Projector> ps);

    [[nodiscard]] const Projector& at(long n) const;
    [[nodiscard]] std::pair<long, long> canonical_window() const;
    /// max over the canonical window of ||P_n||_p; equals sup over Z.
    [[nodiscard]] double projection_bound(Norm p) const;

private:
    std::vector<Projector> ps_;
    long n_min_ = 0;
};

} // namespace dicholin

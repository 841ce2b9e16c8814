#pragma once

#include <utility>
#include <vector>

#include "dicholin/op.hpp"

namespace dicholin {

/// Total map n -> letter index, finitely described. Periodic rules repeat a
/// pattern; windowed rules list letters on [n_min, n_min + len - 1] and extend
/// by their boundary values.
struct ItineraryMap {
    enum class Kind { Periodic, Windowed };
    Kind kind = Kind::Periodic;
    long anchor = 0;              // periodic: pattern starts at this index
    std::vector<int> letters;

    static ItineraryMap periodic(std::vector<int> pattern, long anchor = 0);
    static ItineraryMap windowed(long n_min, std::vector<int> letters);

    [[nodiscard]] int at(long n) const;
    /// A window of n that realizes every letter the map ever produces,
    /// including tails. Used to make sup-over-Z quantities exact.
    [[nodiscard]] std::pair<long, long> support_window() const;
};

/// A two-sided sequence (A_n), n in Z, of invertible operators in one of three
/// closed forms: constant, explicit window with constant extension, or an
/// itinerary over a finite alphabet. All forms are total on Z and immutable,
/// so concurrent reads are safe.
class OperatorSequence {
public:
    static OperatorSequence constant(Op a);
    /// A_{n_min + k} = ops[k]; A_n clamps to the nearest window edge outside.
    static OperatorSequence windowed(long n_min, std::vector<Op> ops);
    static OperatorSequence itinerary(std::vector<Op> alphabet, ItineraryMap map);

    [[nodiscard]] const Op& at(long n) const;

    /// Dense dimension of the state space; 0 means the bilateral-sequence space.
    [[nodiscard]] int dense_dim() const { return dim_; }
    [[nodiscard]] bool on_biseq() const { return dim_ == 0; }

    /// A finite window [a, b] such that {A_n : n in Z} = {A_n : n in [a, b]}.
    [[nodiscard]] std::pair<long, long> canonical_window() const;

    [[nodiscard]] const std::vector<Op>& alphabet() const { return ops_; }
    [[nodiscard]] const ItineraryMap& itinerary_map() const { return map_; }

private:
    std::vector<Op> ops_;
    ItineraryMap map_;
    int dim_ = 0;
};

/// Evolution operator of the sequence applied to a vector:
///   m > n : A_{m-1} ... A_n v
///   m = n : v
///   m < n : A_m^{-1} ... A_{n-1}^{-1} v
/// Never materializes an operator product; cost O(|m - n|) applications.
[[nodiscard]] Vec transition(const OperatorSequence& seq, long m, long n, Vec v);

/// rho = max over n in [n0, n1] of max(log ||A_n||_p, log ||A_n^{-1}||_p),
/// clamped below at 0. With [n0, n1] covering the canonical window this is the
/// exact one-step growth exponent of the whole sequence.
[[nodiscard]] double growth_bound(const OperatorSequence& seq, long n0, long n1, Norm p);

} // namespace dicholin

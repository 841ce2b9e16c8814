#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dicholin/conjugacy.hpp"
#include "dicholin/dichotomy.hpp"

namespace dicholin {

/// Thrown when a generator's own certificate fails the window check; carries
/// the offending report.
class VerificationFailure : public Error {
public:
    VerificationFailure(const std::string& msg, VerificationReport rep)
        : Error(msg), report_(std::move(rep)) {}
    [[nodiscard]] const VerificationReport& report() const { return report_; }

private:
    VerificationReport report_;
};

/// What every generator hands back: the system, its splitting, a certificate
/// already checked on the requested window, and (when the example is about
/// the failure of classical hyperbolicity) a bounded-orbit witness vector.
struct GeneratedSystem {
    OperatorSequence seq;
    ProjectionFamily proj;
    DichotomyCertificate cert;
    std::optional<Vec> bounded_witness;
    /// Connector families only: true when the connector maps part of the
    /// unstable space into the stable one (the inclusion-only regime).
    bool mixes_unstable_into_stable = false;
};

/// Bilateral weighted left shift (S x)_n = w_{n+1} x_{n+1} with small weights
/// on one side of the crossing and large ones on the other.
struct ShiftSpec {
    WeightRule omega = WeightRule::constant(0.5);
    double stable_upper = 0.5;   // sup of |w_n| over n <= crossing; must be < 1
    double unstable_lower = 2.0; // inf of |w_n| over n > crossing; must be > 1
    long crossing = 0;           // stable indices are n <= crossing
    bool contraction_only = false; // all weights small, unstable space = {0}
    Norm p = Norm::Inf;
};

[[nodiscard]] GeneratedSystem make_weighted_shift(const ShiftSpec& spec,
                                                  long n0 = -20, long n1 = 20);

/// Two-dimensional non-autonomous example where the stable space jumps from
/// span(e1) to the whole plane at time 0; only nested inclusions hold, and
/// e2 has a bounded full orbit.
[[nodiscard]] GeneratedSystem make_dimension_exchange(long n0 = -20, long n1 = 20);

/// A finite alphabet of matrices sharing one splitting, each contracting its
/// stable part and expanding its unstable part at rate lambda_i (no leading
/// constant), optionally interleaved with a connector matrix that is allowed
/// to break strict invariance of the splitting.
struct FamilySpec {
    std::vector<Matrix> letters;
    std::vector<double> lambdas;      // one rate per letter
    Matrix splitting;                 // shared projector P (as a matrix)
    std::optional<Matrix> connector;  // referenced in itineraries as index letters.size()
    ItineraryMap itinerary;
    Norm p = Norm::Two;
};

[[nodiscard]] GeneratedSystem make_family_switch(const FamilySpec& spec,
                                                 long n0 = -20, long n1 = 20);

/// The translation family H'_n(x) = x + x_n built from a bounded full orbit
/// x_{n+1} = A_n x_n: an exact conjugacy of the unperturbed system with
/// itself that violates the range condition whenever the orbit leaves the
/// admissible subspace.
struct NonuniquenessWitness {
    long n0 = 0, n1 = 0;
    std::vector<Vec> orbit;         // x_n for n in [n0, n1]
    double sup_offset = 0.0;        // sup_n ||x_n|| = sup ||H'_n - Id||
    OrbitBoundedness evidence;
    /// Distance of x_n from S(n) + A_n^{-1} U(n+1), one entry per window slot.
    std::vector<std::optional<double>> range_dist;

    [[nodiscard]] const Vec& offset_at(long n) const;
    [[nodiscard]] Vec apply(long n, const Vec& x) const; // H'_n(x)
};

/// Requires a nonzero x0 whose full orbit stays within `bound` on the window
/// with settling tails (checked; refused otherwise).
[[nodiscard]] NonuniquenessWitness make_nonuniqueness_witness(const OperatorSequence& seq,
                                                              const ProjectionFamily& proj,
                                                              const Vec& x0, long n0, long n1,
                                                              double bound, Norm p);

} // namespace dicholin

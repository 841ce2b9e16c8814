#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dicholin/projection.hpp"
#include "dicholin/sequence.hpp"

namespace dicholin {

// Window-check tolerances. Splitting and idempotency are algebraic identities
// (rounding only); nesting residuals are relative to ||v||; decay inequalities
// get a hair of multiplicative slack so exact-rate systems pass at equality.
inline constexpr double kSplitTol = 1e-12;
inline constexpr double kNestTol = 1e-10;
inline constexpr double kDecaySlack = 1e-9;

/// A sample that attains (or violates) a checked inequality.
struct CheckWitness {
    long n = 0;              // starting time of the tested vector
    long m = 0;              // time the inequality was evaluated at
    std::string vec;         // short description of the test vector
    double lhs = 0.0;        // measured value
    double rhs = 0.0;        // allowed bound
};

struct CheckResult {
    bool passed = true;
    /// Worst raw margin (bound - measured); negative within slack can still pass.
    double worst_margin = 0.0;
    std::optional<CheckWitness> witness; // the worst sample (always recorded)
};

/// Outcome of checking the dichotomy inequalities on a window.
struct VerificationReport {
    CheckResult splitting;      // v = P_n v + (Id-P_n) v and P_n idempotent
    CheckResult nesting;        // A_n S(n) within S(n+1); A_n^{-1} U(n+1) within U(n)
    CheckResult stable_decay;   // ||A(m,n)v|| <= D e^{-lambda(m-n)} ||v||, v in S(n), m >= n
    CheckResult unstable_decay; // mirrored for U(n), m <= n
    double projection_bound = 0.0; // max_n ||P_n||
    bool projection_bound_finite = true;

    [[nodiscard]] bool passed() const {
        return splitting.passed && nesting.passed && stable_decay.passed &&
               unstable_decay.passed && projection_bound_finite;
    }
};

/// Check every dichotomy inequality for the pair (seq, proj) with constants
/// (D, lambda) over all time pairs inside [n0, n1]. Subspace test vectors are
/// exhaustive basis images for dense spaces with dim <= 32, `samples` seeded
/// random unit vectors above that, and canonical deltas near the window for
/// coordinate projectors.
[[nodiscard]] VerificationReport verify_dichotomy(const OperatorSequence& seq,
                                                  const ProjectionFamily& proj,
                                                  long n0, long n1,
                                                  double D, double lambda, Norm p,
                                                  int samples = 64,
                                                  unsigned long long seed = 0);

/// A claimed dichotomy together with the window report that backs it up.
struct DichotomyCertificate {
    OperatorSequence seq;
    ProjectionFamily proj;
    double D = 1.0;
    double lambda = 0.0;
    long n0 = 0, n1 = 0;
    Norm p = Norm::Inf;
    VerificationReport report;
};

/// Run verify_dichotomy and bundle the result.
[[nodiscard]] DichotomyCertificate certify(OperatorSequence seq, ProjectionFamily proj,
                                           long n0, long n1, double D, double lambda,
                                           Norm p, int samples = 64,
                                           unsigned long long seed = 0);

struct FitResult {
    double lambda = 0.0;
    double D = 0.0;
};

/// For each lambda in the grid, the smallest D passing both decay checks on
/// the window; returns the pair with the largest lambda whose D stays at or
/// below `cap`, or nullopt if every grid value busts the cap.
[[nodiscard]] std::optional<FitResult> fit_constants(const OperatorSequence& seq,
                                                     const ProjectionFamily& proj,
                                                     long n0, long n1,
                                                     const std::vector<double>& lambda_grid,
                                                     Norm p, double cap = 1e6,
                                                     int samples = 64,
                                                     unsigned long long seed = 0);

/// Smallest N >= 1 with D * M * e^{-lambda N} / (1 - e^{-lambda}) <= tail_tol;
/// N = 1 when M = 0. This is the shared truncation depth for every series
/// whose terms are bounded by M and transported with decay (D, lambda).
[[nodiscard]] int truncation_window(double D, double lambda, double M, double tail_tol);

/// The bounded solution x of x_{n+1} - A_n x_n = y_{n+1} for a bounded
/// inhomogeneity y, evaluated on [n0, n1] by the truncated projected series
///   x_n = sum_{k <= n} A(n,k) P_k y_k  -  sum_{k > n} A(n,k) (Id-P_k) y_k.
class BoundedSolution {
public:
    [[nodiscard]] const Vec& at(long n) const;
    [[nodiscard]] long n0() const { return n0_; }
    [[nodiscard]] long n1() const { return n1_; }
    /// Guaranteed bound on ||x_{n+1} - A_n x_n - y_{n+1}||.
    [[nodiscard]] double residual_bound() const { return residual_bound_; }
    [[nodiscard]] int depth() const { return depth_; }

private:
    friend BoundedSolution bounded_solution(const DichotomyCertificate&,
                                            const std::function<Vec(long)>&, double,
                                            long, long, double);
    std::vector<Vec> xs_;
    long n0_ = 0, n1_ = 0;
    double residual_bound_ = 0.0;
    int depth_ = 1;
};

/// cert must carry a passing report (refused otherwise). sup_y bounds ||y_n||
/// over Z and drives the truncation depth; the returned residual bound is
/// 2 * tail_tol * (1 + e^{rho}) with rho the sequence growth exponent.
[[nodiscard]] BoundedSolution bounded_solution(const DichotomyCertificate& cert,
                                               const std::function<Vec(long)>& y,
                                               double sup_y, long n0, long n1,
                                               double tail_tol);

struct OrbitBoundedness {
    bool witness = false;          // bounded and both tails settling
    double max_norm = 0.0;
    std::optional<long> first_exit; // innermost index with ||x_n|| > bound
    bool tails_ok = false;          // both window tails non-increasing (last 5 steps)
};

/// Materialize the full orbit x_n = A(n,0) x_0 on [n0, n1] (n0 <= 0 <= n1)
/// and test it against `bound`. x0 must be nonzero.
[[nodiscard]] OrbitBoundedness check_full_orbit_bounded(const OperatorSequence& seq,
                                                        const Vec& x0, long n0, long n1,
                                                        double bound, Norm p);

} // namespace dicholin

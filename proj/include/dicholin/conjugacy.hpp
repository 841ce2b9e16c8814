#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dicholin/dichotomy.hpp"
#include "dicholin/perturbation.hpp"

namespace dicholin {

struct Smallness {
    bool pass = false;
    double q = 0.0;      // c * D * (1 + e^{-lambda}) / (1 - e^{-lambda})
    double c_star = 0.0; // the c at which q = 1 for these (D, lambda)
};

/// Contraction gate for the conjugacy operator.
[[nodiscard]] Smallness smallness_check(double c, double D, double lambda);

/// Orbit-indexed work table of one correction query: linear orbit points
/// x_m = A(m, n) x on [n - 2N, n + 2N] and correction values h_m on the inner
/// window [n - N, n + N].
struct OrbitTable {
    long center = 0;
    int depth = 1; // N
    std::vector<Vec> orbit;  // times [center - 2N, center + 2N]
    std::vector<Vec> h;      // times [center - N, center + N]

    [[nodiscard]] const Vec& orbit_at(long m) const;
    [[nodiscard]] const Vec& h_at(long m) const;
};

struct HSolve {
    Vec value;                       // h_n(x)
    double err_bound = 0.0;          // iter_tol + 2 tail_tol / (1 - q)
    int iterations = 0;
    std::vector<double> sup_changes; // one entry per sweep
    OrbitTable table;
};

struct HbarSolve {
    Vec value;              // hbar_n(x)
    double err_bound = 0.0; // 2 tail_tol + backward-solve propagation
};

struct SolveOptions {
    /// Optional initial table fill h_m <- initial(m); zero when absent.
    std::function<Vec(long)> initial;
};

/// Distance (in p-norm) from `value` to the subspace S(n) + A_n^{-1} U(n+1)
/// built from the splitting at n and the pulled-back unstable space at n+1.
/// nullopt when the assembled span is too ill-conditioned to trust.
[[nodiscard]] std::optional<double> range_distance(const OperatorSequence& seq,
                                                   const ProjectionFamily& proj,
                                                   long n, const Vec& value, Norm p);

/// The linearization problem: a hyperbolic-with-certificate linear part plus
/// a small Lipschitz perturbation. Construction enforces the contraction gate
/// q < 1 (ContractionError quoting c* otherwise) and a passing certificate,
/// and freezes the truncation depth N from tail_tol.
class ConjugacyProblem {
public:
    ConjugacyProblem(NonlinearSystem sys, DichotomyCertificate cert,
                     double tail_tol, double iter_tol);

    [[nodiscard]] const NonlinearSystem& system() const { return sys_; }
    [[nodiscard]] const DichotomyCertificate& certificate() const { return cert_; }
    [[nodiscard]] double q() const { return q_; }
    [[nodiscard]] int depth() const { return depth_; }
    [[nodiscard]] double tail_tol() const { return tail_tol_; }
    [[nodiscard]] double iter_tol() const { return iter_tol_; }
    /// Guaranteed distance from a solve_h value to the true correction.
    [[nodiscard]] double err_bound() const { return err_bound_; }

    /// Picard iteration on the truncated correction series over the orbit
    /// table of (n, x); returns the centre value and the iteration log.
    [[nodiscard]] HSolve solve_h(long n, const Vec& x, const SolveOptions& opts = {}) const;

    /// Direct evaluation of the inverse-conjugacy correction series, which
    /// tracks the nonlinear orbit of x (backward via fixed-point steps).
    [[nodiscard]] HbarSolve solve_hbar(long n, const Vec& x) const;

    /// || H_{n+1}(A_n x) - (A_n + f_n)(H_n(x)) || with H = Id + h.
    [[nodiscard]] double conjugacy_residual(long n, const Vec& x) const;

    /// (||Hbar_n(H_n(x)) - x||, ||H_n(Hbar_n(x)) - x||).
    [[nodiscard]] std::pair<double, double> inverse_residual(long n, const Vec& x) const;

    /// Distance from h_n(x) to S(n) + A_n^{-1} U(n+1); nullopt when the
    /// assembled subspace is too ill-conditioned to trust.
    [[nodiscard]] std::optional<double> range_check(long n, const Vec& x) const;

private:
    NonlinearSystem sys_;
    DichotomyCertificate cert_;
    double tail_tol_, iter_tol_;
    double q_ = 0.0;
    int depth_ = 1;
    double err_bound_ = 0.0;
};

} // namespace dicholin

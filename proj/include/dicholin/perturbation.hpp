#pragma once

#include <utility>
#include <vector>

#include "dicholin/sequence.hpp"

namespace dicholin {

/// One additive term of a perturbation map: read a single coordinate, push it
/// through a bounded scalar primitive, scale, and write along one output
/// direction. Terms compose by summation only, so Lipschitz and sup bounds of
/// the whole expression stay easy to audit.
struct PerturbTerm {
    enum class Prim { Sin, ClampLinear, Const };
    Prim prim = Prim::Sin;
    double scale = 0.0;
    long in_index = 0;       // dense coordinate or bilateral index
    long out_index = 0;
    double clamp_bound = 1.0; // ClampLinear: clamp(s, -b, b)

    [[nodiscard]] double eval_scalar(double s) const;
    [[nodiscard]] double prim_sup() const;  // sup |g|
    [[nodiscard]] double prim_lip() const;  // Lipschitz constant of g
};

/// A finite sum of terms; one time slice of a perturbation sequence.
struct PerturbExpr {
    std::vector<PerturbTerm> terms;

    [[nodiscard]] Vec eval(const Vec& x) const;
    /// Conservative bounds: sum of per-term contributions.
    [[nodiscard]] double derived_sup() const;
    [[nodiscard]] double derived_lip() const;
};

/// Rule n -> f_n with declared Lipschitz constant c and sup bound M. The
/// declared values are the analysis inputs; audit_constants spot-checks them
/// empirically. Either constant in time or an explicit window of expressions
/// with constant extension.
class PerturbationSequence {
public:
    static PerturbationSequence zero();
    static PerturbationSequence constant_in_time(PerturbExpr e, double c, double M);
    static PerturbationSequence windowed(long n_min, std::vector<PerturbExpr> es,
                                         double c, double M);

    [[nodiscard]] Vec eval(long n, const Vec& x) const;
    [[nodiscard]] double lipschitz() const { return c_; }
    [[nodiscard]] double sup_bound() const { return m_; }
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] std::pair<long, long> time_window() const;
    /// Coordinates any slice reads or writes; sampling support for biseq spaces.
    [[nodiscard]] std::pair<long, long> action_window() const;

private:
    std::vector<PerturbExpr> es_;
    long n_min_ = 0;
    double c_ = 0.0, m_ = 0.0;
};

/// x_{n+1} = A_n x_n + f_n(x_n), bundled with the norm choice and the exact
/// one-step growth exponent rho of the linear part.
struct NonlinearSystem {
    OperatorSequence seq;
    PerturbationSequence f;
    Norm p = Norm::Inf;
    double rho = 0.0;

    NonlinearSystem(OperatorSequence s, PerturbationSequence pert, Norm norm);

    [[nodiscard]] Vec step(long n, const Vec& x) const; // F_n(x)
    /// F_n^{-1}(x). When `achieved` is given it receives an a-posteriori bound
    /// on the distance from the returned iterate to the exact preimage.
    [[nodiscard]] Vec step_inverse(long n, const Vec& x, double tol,
                                   double* achieved = nullptr) const;
};

struct AuditResult {
    double c_emp = 0.0;
    double m_emp = 0.0;
    bool c_flagged = false; // c_emp > c * (1 + 1e-6)
    bool m_flagged = false; // m_emp > M
};

/// Empirical spot check of the declared (c, M) by sampled difference
/// quotients and values. dense_dim = 0 samples finitely supported vectors on
/// the perturbation's action window.
[[nodiscard]] AuditResult audit_constants(const PerturbationSequence& f, int dense_dim,
                                          Norm p, int count, double radius,
                                          unsigned long long seed);

/// Nonlinear evolution F(m, n) x for m >= n (forward composition).
[[nodiscard]] Vec nonlinear_forward(const NonlinearSystem& sys, long m, long n, Vec x);

/// Nonlinear evolution for m <= n, built from single-step inverses
/// y = A_j^{-1}(x - f_j(y)) solved by fixed-point iteration. Requires the
/// backward contraction c * e^{rho} < 1; each step stops once the iterate
/// moves by at most tol * (1 - c e^{rho}) (or hits the floating-point floor),
/// and gives up with ConvergenceError after 1e4 sweeps.
[[nodiscard]] Vec nonlinear_backward(const NonlinearSystem& sys, long m, long n, Vec x,
                                     double tol);

} // namespace dicholin

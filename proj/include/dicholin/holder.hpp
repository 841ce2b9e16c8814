#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dicholin/conjugacy.hpp"

namespace dicholin {

/// Largest admissible Holder exponent lambda / rho. A zero growth bound poses
/// no restriction at all, so rho = 0 maps to +infinity.
double alpha_max(double lambda, double rho);

/// Inputs of the regularity analysis for one system: decay pair (D, lambda),
/// growth bound rho, perturbation bounds (c, M) and the target exponent.
/// Formulas use m_prime = max(M, 1); the analysis is stated for M > 1 and
/// rounding smaller M up keeps every bound valid (it only loosens them).
struct HolderBudget {
    double lambda = 0.0;
    double rho = 0.0;
    double D = 1.0;
    double M = 0.0;
    double c = 0.0;
    double alpha = 0.0;
    double alpha0 = 0.0;  // alpha_max(lambda, rho)
    double m_prime = 1.0; // max(M, 1)

    /// Validates lambda > 0, rho >= 0, D >= 1, M >= 0, c >= 0 and
    /// 0 < alpha < alpha0 (strict), throwing ConfigError otherwise.
    static HolderBudget make(double lambda, double rho, double D, double M,
                             double c, double alpha);
};

struct HolderReport {
    bool pass = false;
    bool c_in_unit = false;     // c <= 1 (c = 0 counts: the trivial case)
    bool backward_ok = false;   // c e^rho < 1, needed for backward Lipschitz bounds
    bool series_finite = false; // both geometric ratios below 1
    bool k_invariance = false;  // threshold tau <= 1

    double r1 = 0.0;  // e^{-lambda} (e^rho + c)^alpha
    double r2 = 0.0;  // e^{-lambda} (e^rho / (1 - c e^rho))^alpha
    double L = 0.0;   // Holder constant of the inverse correction; +inf if the series diverges
    double tau = 0.0; // invariance threshold; pass needs tau <= 1
    /// Certified Holder constant of the correction itself, set only on pass.
    std::optional<double> K;
};

HolderReport holder_smallness(const HolderBudget& b);

struct HolderScale {
    double scale = 0.0;
    double max_diff = 0.0;
    bool used = false; // false when dropped (below noise floor, or zero diff)
};

struct HolderEstimate {
    double slope = 0.0; // least-squares slope of log max_diff against log scale
    std::vector<HolderScale> table;
    int used_count = 0;
    std::vector<std::string> warnings;
};

/// Samples pairs at distance `scale` near x_center, evaluates the conjugacy at
/// both points and fits the worst-case difference against the scale on a
/// log-log axis. Scales must be strictly descending and positive; scales at or
/// below ten times the solver error bound are dropped rather than trusted.
HolderEstimate empirical_holder(const ConjugacyProblem& prob, long n, const Vec& x_center,
                                const std::vector<double>& scales, int pairs_per_scale,
                                unsigned long seed = 0);

} // namespace dicholin

#include "dicholin/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dicholin {

double alpha_max(double lambda, double rho) {
    if (lambda <= 0.0 || rho < 0.0)
        throw ConfigError("alpha_max needs lambda > 0 and rho >= 0");
    if (rho == 0.0) return std::numeric_limits<double>::infinity();
    return lambda / rho;
}

HolderBudget HolderBudget::make(double lambda, double rho, double D, double M,
                                double c, double alpha) {
    if (D < 1.0) throw ConfigError("holder budget needs D >= 1");
    if (M < 0.0 || c < 0.0) throw ConfigError("holder budget needs M >= 0 and c >= 0");
    HolderBudget b;
    b.lambda = lambda;
    b.rho = rho;
    b.D = D;
    b.M = M;
    b.c = c;
    b.alpha = alpha;
    b.alpha0 = alpha_max(lambda, rho);
    b.m_prime = std::max(M, 1.0);
    if (!(alpha > 0.0) || !(alpha < b.alpha0))
        throw ConfigError("exponent must satisfy 0 < alpha < " + std::to_string(b.alpha0));
    return b;
}

HolderReport holder_smallness(const HolderBudget& b) {
    HolderReport r;
    const double erho = std::exp(b.rho);
    const double elam = std::exp(-b.lambda);

    r.c_in_unit = b.c <= 1.0; // c = 0 is the trivial perturbation-free case
    r.backward_ok = b.c * erho < 1.0;

    const double calpha = std::pow(b.c, b.alpha);
    r.r1 = elam * std::pow(erho + b.c, b.alpha);
    r.r2 = r.backward_ok ? elam * std::pow(erho / (1.0 - b.c * erho), b.alpha)
                         : std::numeric_limits<double>::infinity();
    r.series_finite = r.r1 < 1.0 && r.r2 < 1.0;
    // Two geometric sums: j >= 0 with ratio r1, j >= 1 with ratio r2.
    r.L = r.series_finite
              ? 2.0 * b.m_prime * b.D * calpha * (1.0 / (1.0 - r.r1) + r.r2 / (1.0 - r.r2))
              : std::numeric_limits<double>::infinity();

    // alpha < alpha0 guarantees theta < 1, so the threshold is always finite.
    const double theta = std::exp(-b.lambda + b.alpha * b.rho);
    r.tau = 4.0 * b.m_prime * b.D * calpha * std::exp(b.alpha * b.rho) * (1.0 + theta) /
            (1.0 - theta);
    r.k_invariance = r.tau <= 1.0;

    r.pass = r.c_in_unit && r.backward_ok && r.series_finite && r.k_invariance;
    // Every K > 1 gives an invariant set, so the fixed point obeys the bound
    // with constant 1.
    if (r.pass) r.K = 1.0;
    return r;
}

namespace {

Vec random_direction(std::mt19937_64& rng, const Vec& like, Norm p,
                     const std::vector<long>& support) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v;
    for (;;) {
        if (like.is_dense()) {
            std::vector<double> d(static_cast<size_t>(like.dim()));
            for (double& t : d) t = gauss(rng);
            v = Vec::dense(std::move(d));
        } else {
            v = Vec::zero_sparse();
            for (long i : support) v.set(i, gauss(rng));
        }
        double nn = v.norm(p);
        if (nn > 1e-8) {
            v *= 1.0 / nn;
            return v;
        }
    }
}

} // namespace

HolderEstimate empirical_holder(const ConjugacyProblem& prob, long n, const Vec& x_center,
                                const std::vector<double>& scales, int pairs_per_scale,
                                unsigned long seed) {
    if (pairs_per_scale < 1) throw ConfigError("need at least one pair per scale");
    if (scales.empty()) throw ConfigError("empty scale list");
    for (size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] <= 0.0) throw ConfigError("scales must be positive");
        if (i > 0 && scales[i] >= scales[i - 1])
            throw ConfigError("scales must be strictly descending");
    }

    const Norm p = prob.certificate().p;
    const double floor = 10.0 * prob.err_bound();

    std::vector<long> support;
    if (!x_center.is_dense()) {
        for (long i = -3; i <= 3; ++i) support.push_back(i);
        auto [a0, a1] = prob.system().f.action_window();
        for (long i = a0; i <= a1; ++i)
            if (i < -3 || i > 3) support.push_back(i);
        for (const auto& [i, v] : x_center.entries()) {
            (void)v;
            if (std::find(support.begin(), support.end(), i) == support.end())
                support.push_back(i);
        }
    }

    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    HolderEstimate est;
    for (double s : scales) {
        HolderScale row;
        row.scale = s;
        if (s <= floor) {
            est.warnings.push_back("scale " + std::to_string(s) +
                                   " is at or below the solver noise floor; dropped");
            est.table.push_back(row);
            continue;
        }
        double max_diff = 0.0;
        for (int i = 0; i < pairs_per_scale; ++i) {
            Vec w = random_direction(rng, x_center, p, support);
            Vec u = random_direction(rng, x_center, p, support);
            Vec x = x_center + (unif(rng) * s) * w;
            Vec y = x + s * u;
            Vec hx = prob.solve_h(n, x).value;
            Vec hy = prob.solve_h(n, y).value;
            // H = Id + h, so compare x + h(x) with y + h(y).
            double diff = ((x + hx) - (y + hy)).norm(p);
            max_diff = std::max(max_diff, diff);
        }
        row.max_diff = max_diff;
        if (max_diff <= 0.0) {
            est.warnings.push_back("scale " + std::to_string(s) +
                                   " produced identical images; dropped");
        } else {
            row.used = true;
            ++est.used_count;
        }
        est.table.push_back(row);
    }

    if (est.used_count < 2)
        throw ConfigError("fewer than two usable scales; cannot fit a slope");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& row : est.table) {
        if (!row.used) continue;
        double lx = std::log(row.scale), ly = std::log(row.max_diff);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double k = static_cast<double>(est.used_count);
    est.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return est;
}

} // namespace dicholin

#include "dicholin/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dicholin {

namespace {
constexpr double kOrbitCap = 1e150;
constexpr int kSweepCap = 100000;
} // namespace

Smallness smallness_check(double c, double D, double lambda) {
    if (c < 0.0 || D <= 0.0 || lambda <= 0.0)
        throw ConfigError("smallness check needs c >= 0, D > 0, lambda > 0");
    double e = std::exp(-lambda);
    double factor = D * (1.0 + e) / (1.0 - e);
    Smallness s;
    s.q = c * factor;
    s.c_star = 1.0 / factor;
    s.pass = s.q < 1.0;
    return s;
}

const Vec& OrbitTable::orbit_at(long m) const {
    long lo = center - 2 * depth;
    if (m < lo || m > center + 2 * depth) throw ConfigError("orbit index outside table");
    return orbit[static_cast<size_t>(m - lo)];
}

const Vec& OrbitTable::h_at(long m) const {
    long lo = center - depth;
    if (m < lo || m > center + depth) throw ConfigError("h index outside table");
    return h[static_cast<size_t>(m - lo)];
}

ConjugacyProblem::ConjugacyProblem(NonlinearSystem sys, DichotomyCertificate cert,
                                   double tail_tol, double iter_tol)
    : sys_(std::move(sys)), cert_(std::move(cert)), tail_tol_(tail_tol), iter_tol_(iter_tol) {
    if (tail_tol <= 0.0 || iter_tol <= 0.0)
        throw ConfigError("tolerances must be positive");
    if (!cert_.report.passed())
        throw ContractionError("conjugacy problem refuses an unverified certificate");
    if (sys_.p != cert_.p)
        throw ConfigError("system and certificate use different norms");
    if (sys_.seq.dense_dim() != cert_.seq.dense_dim())
        throw ShapeError("system and certificate state spaces differ");

    Smallness s = smallness_check(sys_.f.lipschitz(), cert_.D, cert_.lambda);
    if (!s.pass)
        throw ContractionError("contraction gate failed: q = " + std::to_string(s.q) +
                               " >= 1 (largest admissible c* = " + std::to_string(s.c_star) + ")");
    q_ = s.q;
    depth_ = truncation_window(cert_.D, cert_.lambda, sys_.f.sup_bound(), tail_tol_);
    err_bound_ = iter_tol_ + 2.0 * tail_tol_ / (1.0 - q_);
}

HSolve ConjugacyProblem::solve_h(long n, const Vec& x, const SolveOptions& opts) const {
    const int N = depth_;
    const long lo2 = n - 2L * N, hi2 = n + 2L * N; // orbit range
    const long lo1 = n - N, hi1 = n + N;           // unknown range

    HSolve out;
    out.table.center = n;
    out.table.depth = N;

    // Linear orbit of x across the full table, guarded against blow-up.
    auto& orbit = out.table.orbit;
    orbit.assign(static_cast<size_t>(hi2 - lo2 + 1), Vec{});
    auto oidx = [&](long m) { return static_cast<size_t>(m - lo2); };
    orbit[oidx(n)] = x;
    for (long m = n + 1; m <= hi2; ++m) {
        orbit[oidx(m)] = cert_.seq.at(m - 1).apply(orbit[oidx(m - 1)]);
        if (orbit[oidx(m)].norm(cert_.p) > kOrbitCap)
            throw ConvergenceError("orbit exceeded 1e150 in the forward direction at offset " +
                                   std::to_string(m - n));
    }
    for (long m = n - 1; m >= lo2; --m) {
        orbit[oidx(m)] = cert_.seq.at(m).apply_inverse(orbit[oidx(m + 1)]);
        if (orbit[oidx(m)].norm(cert_.p) > kOrbitCap)
            throw ConvergenceError("orbit exceeded 1e150 in the backward direction at offset " +
                                   std::to_string(n - m));
    }

    auto& h = out.table.h;
    h.assign(static_cast<size_t>(hi1 - lo1 + 1), Vec{});
    auto hidx = [&](long m) { return static_cast<size_t>(m - lo1); };
    auto zero_like = [&](const Vec& v) {
        return v.is_dense() ? Vec::zeros(v.dim()) : Vec::zero_sparse();
    };
    for (long m = lo1; m <= hi1; ++m)
        h[hidx(m)] = opts.initial ? opts.initial(m) : zero_like(x);

    // Values f_j(x_j + h_j) feeding the series; h is zero beyond the unknown
    // window, and j stays inside the materialized orbit.
    std::vector<Vec> g(static_cast<size_t>(hi2 - lo2), Vec{}); // j in [lo2, hi2 - 1]
    auto gidx = [&](long j) { return static_cast<size_t>(j - lo2); };

    const double stop = iter_tol_ * (1.0 - q_);
    std::vector<Vec> fresh(h.size(), Vec{});
    for (int sweep = 1; sweep <= kSweepCap; ++sweep) {
        for (long j = lo2; j <= hi2 - 1; ++j) {
            Vec arg = orbit[oidx(j)];
            if (j >= lo1 && j <= hi1) arg += h[hidx(j)];
            g[gidx(j)] = sys_.f.eval(j, arg);
        }
        double change = 0.0;
        for (long m = lo1; m <= hi1; ++m) {
            // sum_{k=m-N}^{m} A(m,k) P_k g_{k-1}, clipped to the orbit range.
            long klo = std::max(m - N, lo2 + 1);
            Vec acc = cert_.proj.at(klo).apply(g[gidx(klo - 1)]);
            for (long k = klo + 1; k <= m; ++k) {
                acc = cert_.seq.at(k - 1).apply(acc);
                acc += cert_.proj.at(k).apply(g[gidx(k - 1)]);
            }
            // sum_{k=m+1}^{m+N} A(m,k) (Id-P_k) g_{k-1}.
            long khi = std::min(m + N, hi2);
            Vec up = cert_.proj.at(khi).complement_apply(g[gidx(khi - 1)]);
            for (long k = khi - 1; k >= m + 1; --k) {
                up = cert_.seq.at(k).apply_inverse(up);
                up += cert_.proj.at(k).complement_apply(g[gidx(k - 1)]);
            }
            up = cert_.seq.at(m).apply_inverse(up);
            fresh[hidx(m)] = acc - up;
            change = std::max(change, (fresh[hidx(m)] - h[hidx(m)]).norm(cert_.p));
        }
        h.swap(fresh);
        out.sup_changes.push_back(change);
        out.iterations = sweep;
        if (change <= stop) break;
        if (sweep == kSweepCap)
            throw ConvergenceError("correction iteration exceeded sweep cap; last change " +
                                   std::to_string(change));
    }

    out.value = h[hidx(n)];
    out.err_bound = err_bound_;
    return out;
}

HbarSolve ConjugacyProblem::solve_hbar(long n, const Vec& x) const {
    const int N = depth_;
    const double c = sys_.f.lipschitz();
    const double kappa = c * std::exp(sys_.rho);
    if (!sys_.f.is_zero() && kappa >= 1.0)
        throw ContractionError("inverse correction needs c * e^rho < 1; got " +
                               std::to_string(kappa));

    // Nonlinear orbit: backward points z at times n-1 ... n-N-1 with per-step
    // error tracking, forward points at times n ... n+N-1.
    std::vector<Vec> back(static_cast<size_t>(N + 1));  // back[j-1] = z at n-j
    std::vector<double> backerr(static_cast<size_t>(N + 1), 0.0);
    const double beta = sys_.f.is_zero() ? 0.0 : std::exp(sys_.rho) / (1.0 - kappa);
    {
        Vec z = x;
        double acc_err = 0.0;
        for (int j = 1; j <= N + 1; ++j) {
            double step_err = 0.0;
            z = sys_.step_inverse(n - j, z, iter_tol_, &step_err);
            if (z.norm(cert_.p) > kOrbitCap)
                throw ConvergenceError("orbit exceeded 1e150 in the backward direction at offset " +
                                       std::to_string(j));
            acc_err = beta * acc_err + step_err;
            back[static_cast<size_t>(j - 1)] = z;
            backerr[static_cast<size_t>(j - 1)] = acc_err;
        }
    }
    std::vector<Vec> fwd(static_cast<size_t>(N)); // fwd[i] = point at n+i
    {
        Vec z = x;
        for (int i = 0; i < N; ++i) {
            if (i > 0) z = sys_.step(n + i - 1, z);
            if (z.norm(cert_.p) > kOrbitCap)
                throw ConvergenceError("orbit exceeded 1e150 in the forward direction at offset " +
                                       std::to_string(i));
            fwd[static_cast<size_t>(i)] = z;
        }
    }

    auto point_at = [&](long j) -> const Vec& { // nonlinear orbit value at time j
        return j < n ? back[static_cast<size_t>(n - j - 1)] : fwd[static_cast<size_t>(j - n)];
    };

    // sum_{k=n-N}^{n} A(n,k) P_k f_{k-1}(z_{k-1}), Horner from the deep end.
    Vec low = cert_.proj.at(n - N).apply(sys_.f.eval(n - N - 1, point_at(n - N - 1)));
    for (long k = n - N + 1; k <= n; ++k) {
        low = cert_.seq.at(k - 1).apply(low);
        low += cert_.proj.at(k).apply(sys_.f.eval(k - 1, point_at(k - 1)));
    }
    // sum_{k=n+1}^{n+N} A(n,k) (Id-P_k) f_{k-1}(z_{k-1}), Horner inward.
    Vec up = cert_.proj.at(n + N).complement_apply(sys_.f.eval(n + N - 1, point_at(n + N - 1)));
    for (long k = n + N - 1; k >= n + 1; --k) {
        up = cert_.seq.at(k).apply_inverse(up);
        up += cert_.proj.at(k).complement_apply(sys_.f.eval(k - 1, point_at(k - 1)));
    }
    up = cert_.seq.at(n).apply_inverse(up);

    HbarSolve out;
    out.value = up - low; // opposite signs from the forward correction series

    // Error: series tails plus backward-point errors pushed through f (factor
    // c) and the projected transport (factor D e^{-lambda (n-k)}).
    double prop = 0.0;
    for (int j = 1; j <= N + 1; ++j)
        prop += cert_.D * std::exp(-cert_.lambda * (j - 1)) * c *
                backerr[static_cast<size_t>(j - 1)];
    out.err_bound = 2.0 * tail_tol_ + prop;
    return out;
}

double ConjugacyProblem::conjugacy_residual(long n, const Vec& x) const {
    Vec hn = solve_h(n, x).value;
    Vec ax = cert_.seq.at(n).apply(x);
    Vec hnext = solve_h(n + 1, ax).value;
    Vec lhs = hnext - cert_.seq.at(n).apply(hn) - sys_.f.eval(n, x + hn);
    return lhs.norm(cert_.p);
}

std::pair<double, double> ConjugacyProblem::inverse_residual(long n, const Vec& x) const {
    Vec hn = solve_h(n, x).value;
    Vec hbar_at_h = solve_hbar(n, x + hn).value;
    double r1 = (hn + hbar_at_h).norm(cert_.p);

    Vec hbar = solve_hbar(n, x).value;
    Vec h_at_hbar = solve_h(n, x + hbar).value;
    double r2 = (hbar + h_at_hbar).norm(cert_.p);
    return {r1, r2};
}

namespace {

/// Orthonormalize spanning vectors (2-norm Gram-Schmidt with a drop floor).
/// Returns nullopt when some candidate lands in the ambiguous band between
/// clearly-dependent and clearly-new.
std::optional<std::vector<std::vector<double>>> orthonormal_span(
    const std::vector<std::vector<double>>& cand) {
    std::vector<std::vector<double>> basis;
    for (const auto& v0 : cand) {
        std::vector<double> v = v0;
        double orig = 0.0;
        for (double t : v0) orig += t * t;
        orig = std::sqrt(orig);
        if (orig <= 1e-14) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                double dot = 0.0;
                for (size_t i = 0; i < v.size(); ++i) dot += b[i] * v[i];
                for (size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
            }
        }
        double rem = 0.0;
        for (double t : v) rem += t * t;
        rem = std::sqrt(rem);
        double scale = std::max(1.0, orig);
        if (rem <= 1e-12 * scale) continue;          // dependent, drop
        if (rem <= 1e-8 * scale) return std::nullopt; // too close to call
        for (double& t : v) t /= rem;
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace

std::optional<double> range_distance(const OperatorSequence& seq, const ProjectionFamily& proj,
                                     long n, const Vec& value, Norm p) {
    const Vec& h = value;
    const Op& a = seq.at(n);
    const Projector& Pn = proj.at(n);
    const Projector& Pn1 = proj.at(n + 1);

    if (!seq.on_biseq()) {
        const int d = seq.dense_dim();
        std::vector<std::vector<double>> cand;
        for (int i = 0; i < d; ++i) {
            cand.push_back(Pn.apply(Vec::unit(d, i)).data());
            cand.push_back(a.apply_inverse(Pn1.complement_apply(Vec::unit(d, i))).data());
        }
        auto basis = orthonormal_span(cand);
        if (!basis) return std::nullopt;
        // Subtract the orthogonal projection onto the assembled span.
        std::vector<double> r = h.data();
        for (const auto& b : *basis) {
            double dot = 0.0;
            for (size_t i = 0; i < r.size(); ++i) dot += b[i] * r[i];
            for (size_t i = 0; i < r.size(); ++i) r[i] -= dot * b[i];
        }
        return Vec::dense(std::move(r)).norm(p);
    }

    // Coordinate splittings: the subspace is a union of kept index sets, with
    // the unstable part pushed through A_n^{-1} (a pure index shift for the
    // operator kinds that act on this space).
    IndexPredicate kept = Pn.predicate();
    IndexPredicate shifted_unstable = Pn1.predicate().complement();
    if (a.kind() == Op::Kind::Shift) shifted_unstable = shifted_unstable.shifted(1);
    else if (a.kind() != Op::Kind::ScaledIdentity)
        throw ShapeError("range check on the bilateral space needs shift or scaled identity");
    Vec outside = Vec::zero_sparse();
    for (const auto& [i, v] : h.entries())
        if (!kept.keeps(i) && !shifted_unstable.keeps(i)) outside.set(i, v);
    return outside.norm(p);
}

std::optional<double> ConjugacyProblem::range_check(long n, const Vec& x) const {
    return range_distance(cert_.seq, cert_.proj, n, solve_h(n, x).value, cert_.p);
}

} // namespace dicholin

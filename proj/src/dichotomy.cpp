#include "dicholin/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace dicholin {

namespace {

constexpr int kExhaustiveDimCap = 32;

struct TestVec {
    Vec v;
    std::string desc;
};

Vec normalized(Vec v, Norm p) {
    double nv = v.norm(p);
    if (nv > 0.0) v *= 1.0 / nv;
    return v;
}

/// Unit test vectors spanning S(n) (stable = true) or U(n) at time n.
std::vector<TestVec> subspace_vectors(const OperatorSequence& seq, const ProjectionFamily& proj,
                                      long n, long n0, long n1, bool stable, Norm p,
                                      int samples, unsigned long long seed) {
    std::vector<TestVec> out;
    const Projector& P = proj.at(n);
    auto project = [&](const Vec& v) { return stable ? P.apply(v) : P.complement_apply(v); };
    if (seq.on_biseq()) {
        IndexPredicate pred = P.predicate();
        if (!stable) pred = pred.complement();
        std::set<long> js;
        for (long j = n0 - 2; j <= n1 + 2; ++j)
            if (pred.keeps(j)) js.insert(j);
        if (pred.kind == IndexPredicate::Kind::LeqThreshold ||
            pred.kind == IndexPredicate::Kind::GeqThreshold) {
            for (long d = -2; d <= 2; ++d)
                if (pred.keeps(pred.threshold + d)) js.insert(pred.threshold + d);
        }
        for (long j : js)
            out.push_back({Vec::delta(j), "delta_" + std::to_string(j)});
        return out;
    }
    const int d = seq.dense_dim();
    if (d <= kExhaustiveDimCap) {
        for (int i = 0; i < d; ++i) {
            Vec v = project(Vec::unit(d, i));
            if (v.norm(p) <= 1e-14) continue;
            out.push_back({normalized(std::move(v), p),
                           std::string(stable ? "P" : "(Id-P)") + " e_" + std::to_string(i)});
        }
        return out;
    }
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<unsigned long long>(n + 1000003)) ^
                        (stable ? 0ULL : 0x5555555555555555ULL));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        std::vector<double> raw(static_cast<size_t>(d));
        for (double& x : raw) x = u(rng);
        Vec v = project(normalized(Vec::dense(std::move(raw)), p));
        if (v.norm(p) <= 1e-14) continue;
        out.push_back({normalized(std::move(v), p),
                       std::string(stable ? "P" : "(Id-P)") + " r_" + std::to_string(s)});
    }
    return out;
}

/// Generic (unprojected) unit vectors for the algebraic checks.
std::vector<TestVec> generic_vectors(const OperatorSequence& seq, long n0, long n1,
                                     const ProjectionFamily& proj, long n, Norm p,
                                     int samples, unsigned long long seed) {
    std::vector<TestVec> out;
    if (seq.on_biseq()) {
        IndexPredicate pred = proj.at(n).predicate();
        std::set<long> js;
        for (long j = n0 - 2; j <= n1 + 2; ++j) js.insert(j);
        if (pred.kind == IndexPredicate::Kind::LeqThreshold ||
            pred.kind == IndexPredicate::Kind::GeqThreshold)
            for (long d = -2; d <= 2; ++d) js.insert(pred.threshold + d);
        for (long j : js) out.push_back({Vec::delta(j), "delta_" + std::to_string(j)});
        // One mixed-support vector so cross-term cancellation is exercised too.
        Vec mix = Vec::zero_sparse();
        int c = 0;
        for (long j : js) {
            mix.set(j, (c % 2 == 0 ? 1.0 : -0.5));
            if (++c == 6) break;
        }
        if (!mix.is_zero()) out.push_back({normalized(std::move(mix), p), "mixed"});
        return out;
    }
    const int d = seq.dense_dim();
    if (d <= kExhaustiveDimCap) {
        for (int i = 0; i < d; ++i) out.push_back({Vec::unit(d, i), "e_" + std::to_string(i)});
        std::vector<double> ones(static_cast<size_t>(d), 1.0);
        out.push_back({normalized(Vec::dense(std::move(ones)), p), "ones"});
        return out;
    }
    std::mt19937_64 rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL ^ static_cast<unsigned long long>(n + 7));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        std::vector<double> raw(static_cast<size_t>(d));
        for (double& x : raw) x = u(rng);
        out.push_back({normalized(Vec::dense(std::move(raw)), p), "r_" + std::to_string(s)});
    }
    return out;
}

void fold_sample(CheckResult& r, double measured, double bound, double slack,
                 long n, long m, const std::string& desc) {
    double margin = bound - measured;
    if (!r.witness || margin < r.worst_margin) {
        r.worst_margin = margin;
        r.witness = CheckWitness{n, m, desc, measured, bound};
    }
    if (!(measured <= bound + slack)) r.passed = false;
}

struct DecaySample {
    long delta = 0;
    double ratio = 0.0; // ||A(m,n)v|| for a unit test vector
    long n = 0, m = 0;
    std::string desc;
};

/// Walk each subspace vector across the window once, recording every
/// (|m - n|, norm) pair. Shared by verify (fixed constants) and fit.
void collect_decay_samples(const OperatorSequence& seq, const ProjectionFamily& proj,
                           long n0, long n1, Norm p, int samples, unsigned long long seed,
                           std::vector<DecaySample>& stable_out,
                           std::vector<DecaySample>& unstable_out) {
    for (long n = n0; n <= n1; ++n) {
        for (const TestVec& tv : subspace_vectors(seq, proj, n, n0, n1, true, p, samples, seed)) {
            Vec w = tv.v;
            for (long m = n; m <= n1; ++m) {
                if (m > n) w = seq.at(m - 1).apply(w);
                stable_out.push_back({m - n, w.norm(p), n, m, tv.desc});
            }
        }
        for (const TestVec& tv : subspace_vectors(seq, proj, n, n0, n1, false, p, samples, seed)) {
            Vec w = tv.v;
            for (long m = n; m >= n0; --m) {
                if (m < n) w = seq.at(m).apply_inverse(w);
                unstable_out.push_back({n - m, w.norm(p), n, m, tv.desc});
            }
        }
    }
}

} // namespace

VerificationReport verify_dichotomy(const OperatorSequence& seq, const ProjectionFamily& proj,
                                    long n0, long n1, double D, double lambda, Norm p,
                                    int samples, unsigned long long seed) {
    if (n0 > n1) throw ConfigError("verification window is empty");
    if (D <= 0.0 || lambda <= 0.0)
        throw ConfigError("dichotomy constants need D > 0 and lambda > 0");
    VerificationReport rep;

    for (long n = n0; n <= n1; ++n) {
        const Projector& P = proj.at(n);
        const Projector& Pn1 = proj.at(n + 1);
        const Op& A = seq.at(n);
        for (const TestVec& tv : generic_vectors(seq, n0, n1, proj, n, p, samples, seed)) {
            Vec pv = P.apply(tv.v);
            Vec qv = P.complement_apply(tv.v);
            double split = (tv.v - pv - qv).norm(p);
            double idem = (P.apply(pv) - pv).norm(p);
            fold_sample(rep.splitting, std::max(split, idem), kSplitTol, 0.0, n, n, tv.desc);

            // A_n S(n) within S(n+1): complement component after the step.
            double nest_s = Pn1.complement_apply(A.apply(pv)).norm(p);
            // A_n^{-1} U(n+1) within U(n): stable component after the inverse step.
            double nest_u = P.apply(A.apply_inverse(Pn1.complement_apply(tv.v))).norm(p);
            fold_sample(rep.nesting, std::max(nest_s, nest_u), kNestTol, 0.0, n, n + 1, tv.desc);
        }
    }

    std::vector<DecaySample> st, un;
    collect_decay_samples(seq, proj, n0, n1, p, samples, seed, st, un);
    for (const DecaySample& s : st) {
        double bound = D * std::exp(-lambda * static_cast<double>(s.delta));
        fold_sample(rep.stable_decay, s.ratio, bound, kDecaySlack * bound, s.n, s.m, s.desc);
    }
    for (const DecaySample& s : un) {
        double bound = D * std::exp(-lambda * static_cast<double>(s.delta));
        fold_sample(rep.unstable_decay, s.ratio, bound, kDecaySlack * bound, s.n, s.m, s.desc);
    }

    rep.projection_bound = proj.projection_bound(p);
    rep.projection_bound_finite = std::isfinite(rep.projection_bound);
    return rep;
}

DichotomyCertificate certify(OperatorSequence seq, ProjectionFamily proj, long n0, long n1,
                             double D, double lambda, Norm p, int samples,
                             unsigned long long seed) {
    VerificationReport rep = verify_dichotomy(seq, proj, n0, n1, D, lambda, p, samples, seed);
    return DichotomyCertificate{std::move(seq), std::move(proj), D, lambda, n0, n1, p, rep};
}

std::optional<FitResult> fit_constants(const OperatorSequence& seq, const ProjectionFamily& proj,
                                       long n0, long n1, const std::vector<double>& lambda_grid,
                                       Norm p, double cap, int samples, unsigned long long seed) {
    if (lambda_grid.empty()) throw ConfigError("lambda grid must be non-empty");
    std::vector<DecaySample> st, un;
    collect_decay_samples(seq, proj, n0, n1, p, samples, seed, st, un);

    std::optional<FitResult> best;
    for (double lambda : lambda_grid) {
        if (lambda <= 0.0) throw ConfigError("lambda grid values must be positive");
        double need = 0.0;
        for (const DecaySample& s : st)
            need = std::max(need, s.ratio * std::exp(lambda * static_cast<double>(s.delta)));
        for (const DecaySample& s : un)
            need = std::max(need, s.ratio * std::exp(lambda * static_cast<double>(s.delta)));
        if (!std::isfinite(need) || need > cap) continue;
        if (!best || lambda > best->lambda) best = FitResult{lambda, need};
    }
    return best;
}

int truncation_window(double D, double lambda, double M, double tail_tol) {
    if (D <= 0.0 || lambda <= 0.0) throw ConfigError("truncation needs D > 0 and lambda > 0");
    if (tail_tol <= 0.0) throw ConfigError("tail tolerance must be positive");
    if (M < 0.0) throw ConfigError("series bound M must be non-negative");
    if (M == 0.0) return 1;
    double lead = D * M / (1.0 - std::exp(-lambda));
    int n = 1;
    while (lead * std::exp(-lambda * n) > tail_tol) {
        ++n;
        if (n > 1000000) throw ConvergenceError("truncation depth exceeds 1e6");
    }
    return n;
}

BoundedSolution bounded_solution(const DichotomyCertificate& cert,
                                 const std::function<Vec(long)>& y, double sup_y,
                                 long n0, long n1, double tail_tol) {
    if (!cert.report.passed())
        throw ContractionError("bounded_solution refuses an unverified certificate");
    if (n0 > n1) throw ConfigError("evaluation window is empty");
    if (sup_y < 0.0) throw ConfigError("sup_y must be non-negative");

    const int N = truncation_window(cert.D, cert.lambda, sup_y, tail_tol);
    BoundedSolution sol;
    sol.n0_ = n0;
    sol.n1_ = n1;
    sol.depth_ = N;

    // Pre-evaluate y on the full reach of the truncated series.
    const long lo = n0 - N, hi = n1 + N;
    std::vector<Vec> ys(static_cast<size_t>(hi - lo + 1));
    for (long k = lo; k <= hi; ++k) ys[static_cast<size_t>(k - lo)] = y(k);

    for (long n = n0; n <= n1; ++n) {
        // sum_{k=n-N}^{n} A(n,k) P_k y_k, Horner from the deep end.
        Vec acc = cert.proj.at(n - N).apply(ys[static_cast<size_t>(n - N - lo)]);
        for (long k = n - N + 1; k <= n; ++k) {
            acc = cert.seq.at(k - 1).apply(acc);
            acc += cert.proj.at(k).apply(ys[static_cast<size_t>(k - lo)]);
        }
        // sum_{k=n+1}^{n+N} A(n,k) (Id-P_k) y_k, Horner inward.
        Vec up = cert.proj.at(n + N).complement_apply(ys[static_cast<size_t>(n + N - lo)]);
        for (long k = n + N - 1; k >= n + 1; --k) {
            up = cert.seq.at(k).apply_inverse(up);
            up += cert.proj.at(k).complement_apply(ys[static_cast<size_t>(k - lo)]);
        }
        up = cert.seq.at(n).apply_inverse(up);
        sol.xs_.push_back(acc - up);
    }

    auto [c0, c1] = cert.seq.canonical_window();
    double rho = growth_bound(cert.seq, c0, c1, cert.p);
    sol.residual_bound_ = 2.0 * tail_tol * (1.0 + std::exp(rho));
    return sol;
}

const Vec& BoundedSolution::at(long n) const {
    if (n < n0_ || n > n1_) throw ConfigError("bounded solution queried outside its window");
    return xs_[static_cast<size_t>(n - n0_)];
}

OrbitBoundedness check_full_orbit_bounded(const OperatorSequence& seq, const Vec& x0,
                                          long n0, long n1, double bound, Norm p) {
    if (x0.is_zero()) throw ConfigError("orbit check needs x0 != 0");
    if (!(n0 <= 0 && 0 <= n1)) throw ConfigError("orbit window must contain 0");

    std::vector<double> norms(static_cast<size_t>(n1 - n0 + 1));
    Vec w = x0;
    norms[static_cast<size_t>(-n0)] = w.norm(p);
    for (long n = 1; n <= n1; ++n) {
        w = seq.at(n - 1).apply(w);
        norms[static_cast<size_t>(n - n0)] = w.norm(p);
    }
    w = x0;
    for (long n = -1; n >= n0; --n) {
        w = seq.at(n).apply_inverse(w);
        norms[static_cast<size_t>(n - n0)] = w.norm(p);
    }

    OrbitBoundedness res;
    for (double v : norms) res.max_norm = std::max(res.max_norm, v);

    auto norm_at = [&](long n) { return norms[static_cast<size_t>(n - n0)]; };
    bool fwd_ok = true, bwd_ok = true;
    for (long n = std::max(n0, n1 - 5); n < n1; ++n)
        if (norm_at(n + 1) > norm_at(n)) fwd_ok = false;
    for (long n = std::min(n1, n0 + 5); n > n0; --n)
        if (norm_at(n - 1) > norm_at(n)) bwd_ok = false;
    res.tails_ok = fwd_ok && bwd_ok;

    if (res.max_norm <= bound) {
        res.witness = res.tails_ok;
        return res;
    }
    // Innermost exit; positive side wins ties.
    for (long r = 0; r <= std::max(n1, -n0); ++r) {
        if (r <= n1 && norm_at(r) > bound) { res.first_exit = r; break; }
        if (-r >= n0 && norm_at(-r) > bound) { res.first_exit = -r; break; }
    }
    return res;
}

} // namespace dicholin

#include "dicholin/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace dicholin {

double PerturbTerm::eval_scalar(double s) const {
    switch (prim) {
    case Prim::Sin: return std::sin(s);
    case Prim::ClampLinear: return std::clamp(s, -clamp_bound, clamp_bound);
    case Prim::Const: return 1.0;
    }
    return 0.0;
}

double PerturbTerm::prim_sup() const {
    switch (prim) {
    case Prim::Sin: return 1.0;
    case Prim::ClampLinear: return clamp_bound;
    case Prim::Const: return 1.0;
    }
    return 0.0;
}

double PerturbTerm::prim_lip() const {
    switch (prim) {
    case Prim::Sin: return 1.0;
    case Prim::ClampLinear: return 1.0;
    case Prim::Const: return 0.0;
    }
    return 0.0;
}

Vec PerturbExpr::eval(const Vec& x) const {
    Vec out = x.is_dense() ? Vec::zeros(x.dim()) : Vec::zero_sparse();
    for (const PerturbTerm& t : terms) {
        double g = t.scale * t.eval_scalar(x.at(t.in_index));
        out.set(t.out_index, out.at(t.out_index) + g);
    }
    return out;
}

double PerturbExpr::derived_sup() const {
    double s = 0.0;
    for (const PerturbTerm& t : terms) s += std::abs(t.scale) * t.prim_sup();
    return s;
}

double PerturbExpr::derived_lip() const {
    double s = 0.0;
    for (const PerturbTerm& t : terms) s += std::abs(t.scale) * t.prim_lip();
    return s;
}

PerturbationSequence PerturbationSequence::zero() {
    PerturbationSequence f;
    f.es_.push_back(PerturbExpr{});
    return f;
}

PerturbationSequence PerturbationSequence::constant_in_time(PerturbExpr e, double c, double M) {
    if (c < 0.0 || M < 0.0) throw ConfigError("perturbation constants must be non-negative");
    PerturbationSequence f;
    f.es_.push_back(std::move(e));
    f.c_ = c;
    f.m_ = M;
    return f;
}

PerturbationSequence PerturbationSequence::windowed(long n_min, std::vector<PerturbExpr> es,
                                                    double c, double M) {
    if (es.empty()) throw ConfigError("perturbation window must be non-empty");
    if (c < 0.0 || M < 0.0) throw ConfigError("perturbation constants must be non-negative");
    PerturbationSequence f;
    f.es_ = std::move(es);
    f.n_min_ = n_min;
    f.c_ = c;
    f.m_ = M;
    return f;
}

Vec PerturbationSequence::eval(long n, const Vec& x) const {
    long hi = n_min_ + static_cast<long>(es_.size()) - 1;
    long k = n < n_min_ ? n_min_ : (n > hi ? hi : n);
    return es_[static_cast<size_t>(k - n_min_)].eval(x);
}

bool PerturbationSequence::is_zero() const {
    for (const PerturbExpr& e : es_)
        for (const PerturbTerm& t : e.terms)
            if (t.scale != 0.0) return false;
    return true;
}

std::pair<long, long> PerturbationSequence::time_window() const {
    return {n_min_, n_min_ + static_cast<long>(es_.size()) - 1};
}

std::pair<long, long> PerturbationSequence::action_window() const {
    long lo = 0, hi = 0;
    bool any = false;
    for (const PerturbExpr& e : es_)
        for (const PerturbTerm& t : e.terms) {
            long a = std::min(t.in_index, t.out_index);
            long b = std::max(t.in_index, t.out_index);
            if (!any) { lo = a; hi = b; any = true; }
            else { lo = std::min(lo, a); hi = std::max(hi, b); }
        }
    return {lo, hi};
}

NonlinearSystem::NonlinearSystem(OperatorSequence s, PerturbationSequence pert, Norm norm)
    : seq(std::move(s)), f(std::move(pert)), p(norm) {
    auto [a, b] = seq.canonical_window();
    rho = growth_bound(seq, a, b, p);
}

Vec NonlinearSystem::step(long n, const Vec& x) const {
    Vec y = seq.at(n).apply(x);
    y += f.eval(n, x);
    return y;
}

Vec NonlinearSystem::step_inverse(long n, const Vec& x, double tol, double* achieved) const {
    const double kappa = f.lipschitz() * std::exp(rho);
    if (kappa >= 1.0)
        throw ContractionError("backward step needs c * e^rho < 1; got " + std::to_string(kappa));
    const Op& a = seq.at(n);
    Vec y = a.apply_inverse(x);
    if (f.is_zero()) {
        if (achieved) *achieved = 0.0;
        return y;
    }
    const double stop = tol * (1.0 - kappa);
    constexpr int kCap = 10000;
    double step = 0.0;
    for (int it = 0; it < kCap; ++it) {
        Vec next = a.apply_inverse(x - f.eval(n, y));
        step = (next - y).norm(p);
        y = std::move(next);
        // Relative floor: huge iterates cannot move by less than their own
        // representable granularity, which is still an exact-enough stop.
        double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, y.norm(p));
        if (step <= std::max(stop, floor)) {
            // Contraction a-posteriori bound on the remaining error.
            if (achieved) *achieved = step * kappa / (1.0 - kappa);
            return y;
        }
    }
    throw ConvergenceError("backward step exceeded 1e4 sweeps; last step " + std::to_string(step));
}

AuditResult audit_constants(const PerturbationSequence& f, int dense_dim, Norm p, int count,
                            double radius, unsigned long long seed) {
    if (count < 1 || radius <= 0.0) throw ConfigError("audit needs count >= 1, radius > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);

    auto [t0, t1] = f.time_window();
    std::vector<long> times;
    for (long n = t0 - 2; n <= t1 + 2; ++n) times.push_back(n);

    auto [a0, a1] = f.action_window();
    auto sample = [&]() {
        if (dense_dim > 0) {
            std::vector<double> raw(static_cast<size_t>(dense_dim));
            for (double& v : raw) v = u(rng);
            return Vec::dense(std::move(raw));
        }
        Vec v = Vec::zero_sparse();
        for (long i = a0 - 2; i <= a1 + 2; ++i) v.set(i, u(rng));
        return v;
    };

    AuditResult res;
    for (int s = 0; s < count; ++s) {
        long n = times[static_cast<size_t>(s) % times.size()];
        Vec x = sample();
        Vec y = sample();
        double fx = f.eval(n, x).norm(p);
        res.m_emp = std::max(res.m_emp, fx);
        double dxy = (x - y).norm(p);
        if (dxy > 1e-12) {
            double q = (f.eval(n, x) - f.eval(n, y)).norm(p) / dxy;
            res.c_emp = std::max(res.c_emp, q);
        }
        // A nearby pair as well: difference quotients peak at short range.
        Vec yc = x;
        yc.set(a0, yc.at(a0) + 1e-3);
        double qc = (f.eval(n, x) - f.eval(n, yc)).norm(p) / (x - yc).norm(p);
        res.c_emp = std::max(res.c_emp, qc);
    }
    res.c_flagged = res.c_emp > f.lipschitz() * (1.0 + 1e-6);
    res.m_flagged = res.m_emp > f.sup_bound();
    return res;
}

Vec nonlinear_forward(const NonlinearSystem& sys, long m, long n, Vec x) {
    if (m < n) throw ConfigError("nonlinear_forward needs m >= n");
    for (long k = n; k < m; ++k) x = sys.step(k, x);
    return x;
}

Vec nonlinear_backward(const NonlinearSystem& sys, long m, long n, Vec x, double tol) {
    if (m > n) throw ConfigError("nonlinear_backward needs m <= n");
    if (tol <= 0.0) throw ConfigError("tolerance must be positive");
    for (long j = n - 1; j >= m; --j) x = sys.step_inverse(j, x, tol);
    return x;
}

} // namespace dicholin

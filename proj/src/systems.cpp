#include "dicholin/systems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dicholin {

namespace {

std::string report_summary(const VerificationReport& r) {
    auto piece = [](const char* name, const CheckResult& c) {
        return std::string(name) + (c.passed ? " ok" : " FAILED (margin " +
                                                           std::to_string(c.worst_margin) + ")");
    };
    return piece("splitting", r.splitting) + ", " + piece("nesting", r.nesting) + ", " +
           piece("stable decay", r.stable_decay) + ", " +
           piece("unstable decay", r.unstable_decay);
}

void require_passed(const DichotomyCertificate& cert, const std::string& who) {
    if (!cert.report.passed())
        throw VerificationFailure(who + " failed its own window verification: " +
                                      report_summary(cert.report),
                                  cert.report);
}

} // namespace

GeneratedSystem make_weighted_shift(const ShiftSpec& spec, long n0, long n1) {
    if (!(spec.stable_upper > 0.0 && spec.stable_upper < 1.0))
        throw ConfigError("stable-side weight bound must lie in (0, 1)");
    if (!spec.contraction_only && !(spec.unstable_lower > 1.0))
        throw ConfigError("unstable-side weight bound must exceed 1");
    if (spec.omega.inf_abs() <= 0.0)
        throw ConfigError("shift weights must be bounded away from zero");

    // The rule is constant outside its window, so checking one index past each
    // end plus the crossing neighbourhood covers every n in Z.
    long wlo = spec.omega.n_min - 1;
    long whi = spec.omega.n_min + static_cast<long>(spec.omega.window.size());
    long lo = std::min(wlo, spec.crossing - 2);
    long hi = std::max(whi, spec.crossing + 3);
    for (long n = lo; n <= hi; ++n) {
        double w = std::abs(spec.omega.at(n));
        bool stable_side = spec.contraction_only || n <= spec.crossing;
        if (stable_side && w > spec.stable_upper)
            throw ConfigError("weight at index " + std::to_string(n) +
                              " exceeds the declared stable-side bound");
        if (!stable_side && w < spec.unstable_lower)
            throw ConfigError("weight at index " + std::to_string(n) +
                              " is below the declared unstable-side bound");
    }

    GeneratedSystem out;
    out.seq = OperatorSequence::constant(Op::shift(spec.omega));
    Projector p = spec.contraction_only
                      ? Projector::indices(IndexPredicate::all())
                      : Projector::indices(IndexPredicate::leq(spec.crossing));
    out.proj = ProjectionFamily::constant(p);

    double lambda = spec.contraction_only
                        ? -std::log(spec.stable_upper)
                        : std::min(-std::log(spec.stable_upper), std::log(spec.unstable_lower));
    out.cert = certify(out.seq, out.proj, n0, n1, 1.0, lambda, spec.p);
    require_passed(out.cert, "weighted shift");
    if (!spec.contraction_only) out.bounded_witness = Vec::delta(spec.crossing);
    return out;
}

GeneratedSystem make_dimension_exchange(long n0, long n1) {
    GeneratedSystem out;
    out.seq = OperatorSequence::windowed(
        -1, {Op::dense(Matrix::diag({0.5, 2.0})), Op::dense(Matrix::diag({0.5, 0.5}))});
    out.proj = ProjectionFamily::windowed(
        -1, {Projector::dense(Matrix::diag({1.0, 0.0})), Projector::dense(Matrix::identity(2))});
    out.cert = certify(out.seq, out.proj, n0, n1, 1.0, std::log(2.0), Norm::Inf);
    require_passed(out.cert, "dimension exchange");
    out.bounded_witness = Vec::unit(2, 1);
    return out;
}

namespace {

/// Worst ratio ||T v|| / ||v|| over v in a sampled subset of range(proj),
/// using basis images plus seeded random combinations.
double restricted_ratio(const Matrix& t, const Matrix& proj, Norm p, std::mt19937_64& rng) {
    const int d = proj.rows();
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    auto probe = [&](const std::vector<double>& raw) {
        std::vector<double> v = proj.apply(raw);
        double nv = Vec::dense(v).norm(p);
        if (nv <= 1e-12) return;
        double nt = Vec::dense(t.apply(v)).norm(p);
        worst = std::max(worst, nt / nv);
    };
    for (int j = 0; j < d; ++j) {
        std::vector<double> e(static_cast<size_t>(d), 0.0);
        e[static_cast<size_t>(j)] = 1.0;
        probe(e);
    }
    for (int s = 0; s < 32; ++s) {
        std::vector<double> v(static_cast<size_t>(d));
        for (double& x : v) x = gauss(rng);
        probe(v);
    }
    return worst;
}

} // namespace

GeneratedSystem make_family_switch(const FamilySpec& spec, long n0, long n1) {
    const size_t k = spec.letters.size();
    if (k == 0) throw ConfigError("family needs at least one letter");
    if (spec.itinerary.letters.empty()) throw ConfigError("itinerary must be non-empty");
    if (spec.lambdas.size() != k) throw ConfigError("one rate per letter required");
    const int d = spec.splitting.rows();
    if (d == 0 || spec.splitting.cols() != d)
        throw ConfigError("splitting projector must be square and nonempty");
    for (const Matrix& t : spec.letters)
        if (t.rows() != d || t.cols() != d)
            throw ConfigError("every letter must act on the splitting's space");

    const Matrix& P = spec.splitting;
    Matrix Q = Matrix::identity(d) - P;
    if ((P * P - P).norm(spec.p) > 1e-12 * std::max(1.0, P.norm(spec.p)))
        throw ConfigError("splitting matrix is not idempotent");

    std::mt19937_64 rng(12345);
    double lam_tilde = *std::min_element(spec.lambdas.begin(), spec.lambdas.end());
    for (size_t i = 0; i < k; ++i) {
        if (spec.lambdas[i] <= 0.0) throw ConfigError("letter rates must be positive");
        const Matrix& T = spec.letters[i];
        Matrix Tinv = T.inverse();
        double scale = 1e-12 * std::max(1.0, T.norm(spec.p));
        if ((Q * (T * P)).norm(spec.p) > scale)
            throw ConfigError("letter " + std::to_string(i) + " does not keep the stable space");
        if ((P * (Tinv * Q)).norm(spec.p) > scale)
            throw ConfigError("letter " + std::to_string(i) +
                              " does not keep the unstable space backward");
        double rate = std::exp(-spec.lambdas[i]) * (1.0 + 1e-9);
        if (restricted_ratio(T, P, spec.p, rng) > rate)
            throw ConfigError("letter " + std::to_string(i) +
                              " is not a rate-" + std::to_string(spec.lambdas[i]) +
                              " contraction on the stable space");
        if (restricted_ratio(Tinv, Q, spec.p, rng) > rate)
            throw ConfigError("letter " + std::to_string(i) +
                              " does not expand the unstable space at rate " +
                              std::to_string(spec.lambdas[i]));
    }

    std::vector<Op> alphabet;
    alphabet.reserve(k + 1);
    for (const Matrix& t : spec.letters) alphabet.push_back(Op::dense(t));

    GeneratedSystem out;
    double lambda = lam_tilde, D = 1.0;
    int connector_id = -1;
    if (spec.connector) {
        const Matrix& U = *spec.connector;
        if (U.rows() != d || U.cols() != d)
            throw ConfigError("connector must act on the splitting's space");
        Matrix Uinv = U.inverse();
        double scale = 1e-12 * std::max(1.0, U.norm(spec.p));
        if ((Q * (U * P)).norm(spec.p) > scale)
            throw ConfigError("connector must map the stable space into itself");
        if ((P * (Uinv * Q)).norm(spec.p) > scale)
            throw ConfigError(
                "connector inverse must map the unstable space into itself");
        double nu = U.norm(spec.p), nui = Uinv.norm(spec.p);
        if (!(nu < std::exp(lam_tilde)) || !(nui < std::exp(lam_tilde)))
            throw ConfigError("connector norms must satisfy |U| < e^rate and |U^-1| < e^rate; "
                              "got |U| = " + std::to_string(nu) +
                              ", |U^-1| = " + std::to_string(nui) +
                              " against e^rate = " + std::to_string(std::exp(lam_tilde)));
        out.mixes_unstable_into_stable = (P * (U * Q)).norm(spec.p) > scale;
        connector_id = static_cast<int>(k);
        alphabet.push_back(Op::dense(U));
    }

    // Reject consecutive connector uses, including the pairs formed by window
    // tails and the periodic wrap-around: one index past each support end
    // covers both.
    auto [s0, s1] = spec.itinerary.support_window();
    bool uses_connector = false;
    for (long n = s0 - 1; n <= s1 + 1; ++n) {
        int a = spec.itinerary.at(n);
        if (a < 0 || a >= static_cast<int>(alphabet.size()))
            throw ConfigError("itinerary letter out of range at index " + std::to_string(n));
        if (a == connector_id) {
            uses_connector = true;
            if (spec.itinerary.at(n + 1) == connector_id)
                throw ConfigError("connector letters may never appear in pairs (indices " +
                                  std::to_string(n) + " and " + std::to_string(n + 1) + ")");
        }
    }

    if (uses_connector) {
        // One connector step can spend up to log|U| (or log|U^-1| backward) of
        // the budget, and connectors can occupy every other slot, so the
        // per-step rate halves and the odd-step remainder moves into D.
        const Matrix& U = *spec.connector;
        double worst = std::max(std::log(U.norm(spec.p)), std::log(U.inverse().norm(spec.p)));
        lambda = (lam_tilde - worst) / 2.0;
        D = std::max(1.0, std::exp((lam_tilde + worst) / 2.0));
    }

    out.seq = OperatorSequence::itinerary(std::move(alphabet), spec.itinerary);
    out.proj = ProjectionFamily::constant(Projector::dense(P));
    out.cert = certify(out.seq, out.proj, n0, n1, D, lambda, spec.p);
    require_passed(out.cert, "family switch");
    return out;
}

const Vec& NonuniquenessWitness::offset_at(long n) const {
    if (n < n0 || n > n1) throw ConfigError("witness index outside its window");
    return orbit[static_cast<size_t>(n - n0)];
}

Vec NonuniquenessWitness::apply(long n, const Vec& x) const { return x + offset_at(n); }

NonuniquenessWitness make_nonuniqueness_witness(const OperatorSequence& seq,
                                                const ProjectionFamily& proj, const Vec& x0,
                                                long n0, long n1, double bound, Norm p) {
    NonuniquenessWitness w;
    w.evidence = check_full_orbit_bounded(seq, x0, n0, n1, bound, p);
    if (!w.evidence.witness)
        throw ConfigError("orbit of the given vector is not bounded on the window; "
                          "refusing the translation family");

    w.n0 = n0;
    w.n1 = n1;
    w.orbit.resize(static_cast<size_t>(n1 - n0 + 1));
    Vec cur = x0;
    w.orbit[static_cast<size_t>(-n0)] = cur;
    for (long n = 1; n <= n1; ++n) {
        cur = seq.at(n - 1).apply(cur);
        w.orbit[static_cast<size_t>(n - n0)] = cur;
    }
    cur = x0;
    for (long n = -1; n >= n0; --n) {
        cur = seq.at(n).apply_inverse(cur);
        w.orbit[static_cast<size_t>(n - n0)] = cur;
    }

    for (long n = n0; n <= n1; ++n) {
        const Vec& xn = w.orbit[static_cast<size_t>(n - n0)];
        w.sup_offset = std::max(w.sup_offset, xn.norm(p));
        w.range_dist.push_back(range_distance(seq, proj, n, xn, p));
    }
    return w;
}

} // namespace dicholin

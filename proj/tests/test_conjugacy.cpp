#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dicholin/conjugacy.hpp"

using namespace dicholin;

namespace {

OperatorSequence exchange_seq() {
    return OperatorSequence::windowed(
        -1, {Op::dense(Matrix::diag({0.5, 2.0})), Op::dense(Matrix::diag({0.5, 0.5}))});
}

ProjectionFamily exchange_proj() {
    return ProjectionFamily::windowed(
        -1, {Projector::dense(Matrix::diag({1.0, 0.0})), Projector::dense(Matrix::identity(2))});
}

PerturbationSequence sin_pert(double scale) {
    PerturbTerm t;
    t.prim = PerturbTerm::Prim::Sin;
    t.scale = scale;
    PerturbExpr e;
    e.terms.push_back(t);
    return PerturbationSequence::constant_in_time(e, std::abs(scale), std::abs(scale));
}

ConjugacyProblem scalar_problem(double scale, double tail_tol, double iter_tol) {
    OperatorSequence seq = OperatorSequence::constant(Op::dense(Matrix::diag({0.5})));
    ProjectionFamily proj = ProjectionFamily::constant(Projector::dense(Matrix::identity(1)));
    DichotomyCertificate cert = certify(seq, proj, -10, 10, 1.0, std::log(2.0), Norm::Inf);
    return ConjugacyProblem(NonlinearSystem(seq, sin_pert(scale), Norm::Inf), cert,
                            tail_tol, iter_tol);
}

ConjugacyProblem exchange_problem(double scale, double tail_tol, double iter_tol) {
    OperatorSequence seq = exchange_seq();
    ProjectionFamily proj = exchange_proj();
    DichotomyCertificate cert = certify(seq, proj, -20, 20, 1.0, std::log(2.0), Norm::Inf);
    return ConjugacyProblem(NonlinearSystem(seq, sin_pert(scale), Norm::Inf), cert,
                            tail_tol, iter_tol);
}

// ---- independent reference solver for the truncated correction system ----
//
// The unknowns are the corrections on [n - N, n + N]; the series terms read
// the linear orbit on [n - 2N, n + 2N] and treat corrections outside the
// unknown window as zero. This evaluator forms every series term literally
// (transition products, no shared Horner state) so it shares no code path
// with the solver under test.

struct TruncatedSystem {
    const ConjugacyProblem* prob;
    long n;
    std::vector<Vec> orbit; // [n - 2N, n + 2N]

    TruncatedSystem(const ConjugacyProblem& p, long center, const Vec& x)
        : prob(&p), n(center) {
        const int N = p.depth();
        for (long m = n - 2L * N; m <= n + 2L * N; ++m)
            orbit.push_back(transition(p.certificate().seq, m, n, x));
    }

    [[nodiscard]] int dim() const { return orbit.front().dim(); }
    [[nodiscard]] long lo1() const { return n - prob->depth(); }

    [[nodiscard]] std::vector<Vec> apply(const std::vector<Vec>& h) const {
        const auto& cert = prob->certificate();
        const auto& f = prob->system().f;
        const int N = prob->depth();
        const long lo2 = n - 2L * N, hi2 = n + 2L * N;
        auto ox = [&](long m) -> const Vec& { return orbit[static_cast<size_t>(m - lo2)]; };

        std::vector<Vec> g(static_cast<size_t>(hi2 - lo2));
        for (long j = lo2; j < hi2; ++j) {
            Vec arg = ox(j);
            if (j >= lo1() && j <= lo1() + 2 * N) arg += h[static_cast<size_t>(j - lo1())];
            g[static_cast<size_t>(j - lo2)] = f.eval(j, arg);
        }
        auto gat = [&](long j) -> const Vec& { return g[static_cast<size_t>(j - lo2)]; };

        std::vector<Vec> out(h.size());
        for (long m = lo1(); m <= lo1() + 2 * N; ++m) {
            Vec acc = Vec::zeros(dim());
            for (long k = std::max(m - N, lo2 + 1); k <= m; ++k)
                acc += transition(cert.seq, m, k, cert.proj.at(k).apply(gat(k - 1)));
            for (long k = m + 1; k <= std::min(m + N, hi2); ++k)
                acc -= transition(cert.seq, m, k, cert.proj.at(k).complement_apply(gat(k - 1)));
            out[static_cast<size_t>(m - lo1())] = acc;
        }
        return out;
    }
};

double table_gap(const std::vector<Vec>& a, const std::vector<Vec>& b, Norm p) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, (a[i] - b[i]).norm(p));
    return worst;
}

/// Damped iteration h <- (h + T h)/2 from one random start.
Vec solve_damped(const TruncatedSystem& sys, unsigned long long seed) {
    const int N = sys.prob->depth();
    const int d = sys.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    std::vector<Vec> h(static_cast<size_t>(2 * N + 1));
    for (Vec& v : h) {
        std::vector<double> raw(static_cast<size_t>(d));
        for (double& t : raw) t = u(rng);
        v = Vec::dense(std::move(raw));
    }
    for (int sweep = 0; sweep < 50000; ++sweep) {
        std::vector<Vec> th = sys.apply(h);
        double change = table_gap(h, th, Norm::Inf);
        for (size_t i = 0; i < h.size(); ++i) h[i] = 0.5 * (h[i] + th[i]);
        if (change <= 1e-13) return h[static_cast<size_t>(N)];
    }
    throw ConvergenceError("reference iteration stalled");
}

/// All ten starts must land on the same table; returns the common centre value.
Vec oracle_ten_starts(const ConjugacyProblem& prob, long n, const Vec& x) {
    TruncatedSystem sys(prob, n, x);
    std::vector<Vec> landed;
    for (unsigned long long s = 1; s <= 10; ++s) landed.push_back(solve_damped(sys, 1000 + s));
    for (const Vec& v : landed)
        REQUIRE((v - landed.front()).norm(Norm::Inf) <= 1e-11);
    return landed.front();
}

/// Scalar shooting: pin the centre unknown at u, relax the rest, and read the
/// image of the centre; the fixed point is the root of phi(u) - u, which is
/// strictly decreasing because the table map is a contraction.
double oracle_bisect(const ConjugacyProblem& prob, long n, const Vec& x) {
    TruncatedSystem sys(prob, n, x);
    const size_t centre = static_cast<size_t>(prob.depth());
    auto phi = [&](double u) {
        std::vector<Vec> h(static_cast<size_t>(2 * prob.depth() + 1), Vec::zeros(1));
        h[centre] = Vec::dense({u});
        for (int sweep = 0; sweep < 10000; ++sweep) {
            std::vector<Vec> th = sys.apply(h);
            th[centre] = Vec::dense({u});
            double change = table_gap(h, th, Norm::Inf);
            h.swap(th);
            if (change <= 1e-14) break;
        }
        return sys.apply(h)[centre].at(0);
    };
    double lo = -0.5, hi = 0.5;
    REQUIRE(phi(lo) - lo > 0.0);
    REQUIRE(phi(hi) - hi < 0.0);
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (phi(mid) - mid > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_SUITE("conjugacy") {

TEST_CASE("contraction gate closed forms") {
    Smallness s = smallness_check(0.1, 1.0, std::log(2.0));
    CHECK(s.q == doctest::Approx(0.3));
    CHECK(s.c_star == doctest::Approx(1.0 / 3.0));
    CHECK(s.pass);

    Smallness big = smallness_check(0.4, 1.0, std::log(2.0));
    CHECK(big.q == doctest::Approx(1.2));
    CHECK(!big.pass);

    CHECK_THROWS_AS((void)smallness_check(-0.1, 1.0, 1.0), ConfigError);
}

TEST_CASE("problem construction rejects a violated gate and quotes the threshold") {
    OperatorSequence seq = OperatorSequence::constant(Op::dense(Matrix::diag({0.5})));
    ProjectionFamily proj = ProjectionFamily::constant(Projector::dense(Matrix::identity(1)));
    DichotomyCertificate cert = certify(seq, proj, -5, 5, 1.0, std::log(2.0), Norm::Inf);
    try {
        ConjugacyProblem bad(NonlinearSystem(seq, sin_pert(0.4), Norm::Inf), cert, 1e-9, 1e-10);
        FAIL("expected the contraction gate to throw");
    } catch (const ContractionError& e) {
        CHECK(std::string(e.what()).find("0.333333") != std::string::npos);
    }

    DichotomyCertificate broken = certify(seq, proj, -5, 5, 1.0, 2.0, Norm::Inf);
    CHECK(!broken.report.passed());
    CHECK_THROWS_AS(ConjugacyProblem(NonlinearSystem(seq, sin_pert(0.05), Norm::Inf),
                                     broken, 1e-9, 1e-10),
                    ContractionError);
}

TEST_CASE("zero perturbation has the identity conjugacy") {
    OperatorSequence seq = exchange_seq();
    DichotomyCertificate cert =
        certify(seq, exchange_proj(), -20, 20, 1.0, std::log(2.0), Norm::Inf);
    ConjugacyProblem prob(NonlinearSystem(seq, PerturbationSequence::zero(), Norm::Inf),
                          cert, 1e-9, 1e-10);
    CHECK(prob.depth() == 1); // nothing to sum
    Vec x = Vec::dense({1.3, -0.4});
    CHECK(prob.solve_h(0, x).value.norm(Norm::Inf) <= 1e-14);
    CHECK(prob.conjugacy_residual(-2, x) <= 1e-14);
    auto [r1, r2] = prob.inverse_residual(1, x);
    CHECK(r1 <= 1e-14);
    CHECK(r2 <= 1e-14);
}

TEST_CASE("scalar correction matches the reference solvers") {
    // depth chosen so the truncated system is small enough to brute-force
    ConjugacyProblem prob = scalar_problem(0.05, 5e-4, 1e-12);
    REQUIRE(prob.depth() == 8);

    for (double x0 : {0.7, -1.3, 2.0}) {
        Vec x = Vec::dense({x0});
        Vec fast = prob.solve_h(0, x).value;
        Vec ten = oracle_ten_starts(prob, 0, x);
        CHECK((fast - ten).norm(Norm::Inf) <= 1e-9);
        double bis = oracle_bisect(prob, 0, x);
        CHECK(std::abs(fast.at(0) - bis) <= 1e-9);
    }

    // off-centre start time
    Vec x = Vec::dense({0.9});
    Vec fast = prob.solve_h(3, x).value;
    Vec ten = oracle_ten_starts(prob, 3, x);
    CHECK((fast - ten).norm(Norm::Inf) <= 1e-9);
}

TEST_CASE("planar correction matches the damped reference") {
    ConjugacyProblem prob = exchange_problem(0.02, 2e-4, 1e-12);
    REQUIRE(prob.depth() == 8);

    for (long n : {0L, -1L, 2L}) {
        Vec x = Vec::dense({0.9, -1.1});
        Vec fast = prob.solve_h(n, x).value;
        Vec ten = oracle_ten_starts(prob, n, x);
        CHECK((fast - ten).norm(Norm::Inf) <= 1e-9);
    }
}

TEST_CASE("odd symmetry pins the correction of the origin to zero") {
    ConjugacyProblem prob = scalar_problem(0.05, 1e-9, 1e-10);
    CHECK(prob.solve_h(0, Vec::zeros(1)).value.norm(Norm::Inf) <= 1e-12);

    ConjugacyProblem plane = exchange_problem(0.02, 1e-9, 1e-10);
    CHECK(plane.solve_h(0, Vec::zeros(2)).value.norm(Norm::Inf) <= 1e-12);
}

TEST_CASE("iteration contracts at the predicted rate") {
    ConjugacyProblem prob = exchange_problem(0.02, 1e-9, 1e-10);
    HSolve hs = prob.solve_h(-1, Vec::dense({1.7, 0.3}));
    REQUIRE(hs.sup_changes.size() >= 2);
    for (size_t i = 1; i + 1 < hs.sup_changes.size(); ++i) {
        if (hs.sup_changes[i] <= 1e-13 * hs.sup_changes.front()) continue;
        CHECK(hs.sup_changes[i + 1] / hs.sup_changes[i] <= prob.q() + 0.05);
    }
}

TEST_CASE("error bound covers the gap to a much deeper solve") {
    ConjugacyProblem cheap = exchange_problem(0.02, 1e-9, 1e-10);
    ConjugacyProblem tight = exchange_problem(0.02, 1e-13, 1e-13);
    CHECK(tight.depth() > cheap.depth());
    for (double x1 : {0.5, -1.9}) {
        Vec x = Vec::dense({x1, 0.8});
        Vec a = cheap.solve_h(1, x).value;
        Vec b = tight.solve_h(1, x).value;
        CHECK((a - b).norm(Norm::Inf) <= cheap.err_bound() + tight.err_bound());
    }
}

TEST_CASE("residuals sit inside their printed bounds") {
    ConjugacyProblem prob = exchange_problem(0.02, 1e-9, 1e-10);
    const double erho = std::exp(std::log(2.0));
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        long n = static_cast<long>(i) % 5 - 2;
        Vec x = Vec::dense({u(rng), u(rng)});
        CHECK(prob.conjugacy_residual(n, x) <=
              (1.0 + erho + 0.02) * prob.err_bound());
        auto [r1, r2] = prob.inverse_residual(n, x);
        CHECK(r1 <= 1e-6);
        CHECK(r2 <= 1e-6);
    }
}

TEST_CASE("inverse correction error bound tracks its ingredients") {
    ConjugacyProblem prob = scalar_problem(0.05, 1e-9, 1e-10);
    HbarSolve hb = prob.solve_hbar(0, Vec::dense({0.8}));
    CHECK(hb.err_bound >= 2e-9);      // at least the two series tails
    CHECK(hb.err_bound <= 1e-6);      // and no runaway propagation
    CHECK(hb.value.norm(Norm::Inf) <= 0.15 + 1e-6); // same sup bound as h
}

TEST_CASE("correction tables expose the orbit they used") {
    ConjugacyProblem prob = scalar_problem(0.05, 5e-4, 1e-10);
    HSolve hs = prob.solve_h(2, Vec::dense({1.0}));
    const int N = prob.depth();
    CHECK(hs.table.orbit_at(2).at(0) == doctest::Approx(1.0));
    CHECK(hs.table.orbit_at(2 + N).at(0) == doctest::Approx(std::pow(0.5, N)));
    CHECK((hs.table.h_at(2) - hs.value).is_zero());
    CHECK_THROWS_AS((void)hs.table.h_at(2 + N + 1), ConfigError);
    CHECK_THROWS_AS((void)hs.table.orbit_at(2 + 2 * N + 1), ConfigError);
}

TEST_CASE("warm starts land on the same fixed point") {
    ConjugacyProblem prob = exchange_problem(0.02, 1e-9, 1e-12);
    Vec x = Vec::dense({-0.6, 1.4});
    Vec cold = prob.solve_h(0, x).value;
    SolveOptions warm;
    warm.initial = [](long) { return Vec::dense({0.1, -0.1}); };
    Vec warm_value = prob.solve_h(0, x, warm).value;
    CHECK((cold - warm_value).norm(Norm::Inf) <= 1e-10);
}

TEST_CASE("admissible-subspace distance on the plane") {
    OperatorSequence seq = exchange_seq();
    ProjectionFamily proj = exchange_proj();

    // at the switch time the admissible subspace is only the first axis
    auto d = range_distance(seq, proj, -1, Vec::dense({0.0, 0.5}), Norm::Inf);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(0.5));
    CHECK(*range_distance(seq, proj, -1, Vec::dense({2.0, 0.0}), Norm::Inf) ==
          doctest::Approx(0.0));
    // from time 0 on the stable space is everything
    CHECK(*range_distance(seq, proj, 0, Vec::dense({1.0, 1.0}), Norm::Inf) ==
          doctest::Approx(0.0));

    ConjugacyProblem prob = exchange_problem(0.02, 1e-9, 1e-10);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        Vec x = Vec::dense({u(rng), u(rng)});
        CHECK(std::abs(prob.solve_h(-1, x).value.at(1)) <= 1e-10);
        auto rc = prob.range_check(-1, x);
        REQUIRE(rc.has_value());
        CHECK(*rc <= 1e-10);
    }
}

TEST_CASE("admissible-subspace distance on the bilateral space") {
    OperatorSequence seq = OperatorSequence::constant(Op::shift(WeightRule::two_sided(0.5, 2.0)));
    ProjectionFamily proj = ProjectionFamily::constant(Projector::indices(IndexPredicate::leq(0)));

    // kept indices <= 0, pulled-back complement indices >= 2: slot 1 is outside
    auto d = range_distance(seq, proj, 0, Vec::delta(1), Norm::Inf);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(1.0));
    CHECK(*range_distance(seq, proj, 0, Vec::delta(0) + Vec::delta(2), Norm::Inf) ==
          doctest::Approx(0.0));
    CHECK(*range_distance(seq, proj, 0, Vec::delta(1, 0.25) + Vec::delta(-3), Norm::Inf) ==
          doctest::Approx(0.25));
}

TEST_CASE("orbit blow-up past the guard raises a directional error") {
    OperatorSequence seq = OperatorSequence::constant(Op::dense(Matrix::diag({0.25})));
    ProjectionFamily proj = ProjectionFamily::constant(Projector::dense(Matrix::identity(1)));
    DichotomyCertificate cert = certify(seq, proj, -3, 3, 1.0, std::log(4.0), Norm::Inf);
    ConjugacyProblem prob(NonlinearSystem(seq, sin_pert(0.05), Norm::Inf), cert,
                          1e-130, 1e-10);
    REQUIRE(prob.depth() > 180); // deep table forces the backward orbit to overflow
    try {
        (void)prob.solve_h(0, Vec::dense({1.0}));
        FAIL("expected the orbit guard to trip");
    } catch (const ConvergenceError& e) {
        CHECK(std::string(e.what()).find("backward") != std::string::npos);
    }
}

} // TEST_SUITE

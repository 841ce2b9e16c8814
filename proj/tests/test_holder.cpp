#include <doctest.h>

#include <cmath>
#include <limits>

#include "dicholin/holder.hpp"

using namespace dicholin;

namespace {

const double kLn2 = std::log(2.0);

ConjugacyProblem identity_plane_problem() {
    OperatorSequence seq = OperatorSequence::windowed(
        -1, {Op::dense(Matrix::diag({0.5, 2.0})), Op::dense(Matrix::diag({0.5, 0.5}))});
    ProjectionFamily proj = ProjectionFamily::windowed(
        -1, {Projector::dense(Matrix::diag({1.0, 0.0})), Projector::dense(Matrix::identity(2))});
    DichotomyCertificate cert = certify(seq, proj, -20, 20, 1.0, kLn2, Norm::Inf);
    return ConjugacyProblem(NonlinearSystem(seq, PerturbationSequence::zero(), Norm::Inf),
                            cert, 1e-9, 1e-10);
}

ConjugacyProblem scalar_sine_problem(double tail_tol) {
    OperatorSequence seq = OperatorSequence::constant(Op::dense(Matrix::diag({0.5})));
    ProjectionFamily proj = ProjectionFamily::constant(Projector::dense(Matrix::identity(1)));
    DichotomyCertificate cert = certify(seq, proj, -10, 10, 1.0, kLn2, Norm::Inf);
    PerturbTerm t;
    t.prim = PerturbTerm::Prim::Sin;
    t.scale = 0.05;
    PerturbExpr e;
    e.terms.push_back(t);
    return ConjugacyProblem(
        NonlinearSystem(seq, PerturbationSequence::constant_in_time(e, 0.05, 0.05), Norm::Inf),
        cert, tail_tol, 1e-10);
}

} // namespace

TEST_SUITE("holder") {

TEST_CASE("largest admissible exponent") {
    CHECK(alpha_max(kLn2, kLn2) == doctest::Approx(1.0));
    CHECK(alpha_max(kLn2, 2.0 * kLn2) == doctest::Approx(0.5));
    CHECK(std::isinf(alpha_max(1.0, 0.0)));
    CHECK_THROWS_AS((void)alpha_max(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS((void)alpha_max(1.0, -0.5), ConfigError);
}

TEST_CASE("budget validation") {
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 0.5, 1.0, 0.1, 0.5), ConfigError);
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 1.0, -1.0, 0.1, 0.5), ConfigError);
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 1.0, 1.0, -0.1, 0.5), ConfigError);
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 0.1, 0.0), ConfigError);
    // the admissible exponent interval is open on both ends
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS((void)HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 0.1, 1.2), ConfigError);

    HolderBudget b = HolderBudget::make(kLn2, 2.0 * kLn2, 1.5, 0.3, 0.01, 0.25);
    CHECK(b.alpha0 == doctest::Approx(0.5));
    CHECK(b.m_prime == doctest::Approx(1.0)); // small amplitudes round up
    CHECK(HolderBudget::make(kLn2, kLn2, 1.0, 2.5, 0.01, 0.5).m_prime == doctest::Approx(2.5));

    // no growth bound means any positive exponent is admissible
    CHECK(HolderBudget::make(kLn2, 0.0, 1.0, 1.0, 0.1, 7.0).alpha == doctest::Approx(7.0));
}

TEST_CASE("threshold closed form at the reference point") {
    HolderReport ok = holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 1e-4, 0.5));
    CHECK(ok.tau == doctest::Approx(0.32970562748477139).epsilon(1e-14));
    CHECK(ok.r1 == doctest::Approx(0.5 * std::sqrt(2.0 + 1e-4)));
    CHECK(ok.r2 == doctest::Approx(0.5 * std::sqrt(2.0 / (1.0 - 2e-4))));
    CHECK(ok.c_in_unit);
    CHECK(ok.backward_ok);
    CHECK(ok.series_finite);
    CHECK(ok.k_invariance);
    CHECK(ok.pass);
    REQUIRE(ok.K.has_value());
    CHECK(*ok.K == 1.0);

    // a hundred times larger amplitude blows the invariance threshold
    HolderReport fail = holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 1e-2, 0.5));
    CHECK(fail.tau == doctest::Approx(3.2970562748477137).epsilon(1e-14));
    CHECK(fail.r1 == doctest::Approx(0.5 * std::sqrt(2.01)));
    CHECK(fail.c_in_unit);
    CHECK(fail.backward_ok);
    CHECK(fail.series_finite);
    CHECK(!fail.k_invariance);
    CHECK(!fail.pass);
    CHECK(!fail.K.has_value());
}

TEST_CASE("inverse-correction constant equals the summed series") {
    HolderBudget b = HolderBudget::make(kLn2, 0.3, 1.7, 1.4, 0.05, 0.8);
    HolderReport r = holder_smallness(b);
    REQUIRE(r.series_finite);

    // sum the two geometric series term by term instead of using closed forms
    double s1 = 0.0, s2 = 0.0, t1 = 1.0, t2 = r.r2;
    while (t1 > 1e-18 || t2 > 1e-18) {
        s1 += t1;
        s2 += t2;
        t1 *= r.r1;
        t2 *= r.r2;
    }
    double oracle = 2.0 * b.m_prime * b.D * std::pow(b.c, b.alpha) * (s1 + s2);
    CHECK(r.L == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("zero amplitude is trivially regular") {
    HolderReport r = holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 0.0, 0.0, 0.5));
    CHECK(r.tau == 0.0);
    CHECK(r.L == 0.0);
    CHECK(r.pass);
    REQUIRE(r.K.has_value());
    CHECK(*r.K == 1.0);
}

TEST_CASE("gate booleans isolate each failure mode") {
    // amplitude above one: both the unit gate and the backward gate fail
    HolderReport big = holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 1.5, 0.5));
    CHECK(!big.c_in_unit);
    CHECK(!big.backward_ok);
    CHECK(std::isinf(big.r2));
    CHECK(std::isinf(big.L));
    CHECK(!big.series_finite);
    CHECK(!big.pass);

    // c e^rho exactly one is already too much for the backward estimates
    HolderReport edge = holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 1.0, 0.5, 0.5));
    CHECK(edge.c_in_unit);
    CHECK(!edge.backward_ok);
    CHECK(std::isinf(edge.L));
    CHECK(!edge.pass);
}

TEST_CASE("threshold grows with the amplitude") {
    auto tau_at = [](double c) {
        return holder_smallness(HolderBudget::make(kLn2, kLn2, 1.0, 1.0, c, 0.5)).tau;
    };
    CHECK(tau_at(1e-6) < tau_at(1e-4));
    CHECK(tau_at(1e-4) < tau_at(1e-2));
    // square-root scaling at alpha = 1/2
    CHECK(tau_at(1e-4) == doctest::Approx(10.0 * tau_at(1e-6)));
}

TEST_CASE("empirical slope of the identity conjugacy") {
    ConjugacyProblem prob = identity_plane_problem();
    HolderEstimate est = empirical_holder(prob, 0, Vec::dense({0.25, -0.4}),
                                          {1e-1, 1e-2, 1e-3}, 6, 9);
    CHECK(std::abs(est.slope - 1.0) <= 0.02);
    CHECK(est.used_count == 3);
    CHECK(est.warnings.empty());
    for (const auto& row : est.table) {
        CHECK(row.used);
        // the images are exactly the inputs, so the worst gap is the scale itself
        CHECK(row.max_diff == doctest::Approx(row.scale).epsilon(1e-9));
    }
}

TEST_CASE("scales inside the noise floor are dropped, not trusted") {
    ConjugacyProblem prob = scalar_sine_problem(1e-4);
    REQUIRE(prob.err_bound() > 1e-4 / 10.0); // makes the smallest scale untrustworthy
    HolderEstimate est = empirical_holder(prob, 0, Vec::dense({0.5}),
                                          {1e-1, 1e-2, 1e-3}, 4, 3);
    CHECK(est.used_count == 2);
    CHECK(est.table.size() == 3);
    CHECK(!est.table[2].used);
    REQUIRE(est.warnings.size() == 1);
    CHECK(est.warnings[0].find("noise floor") != std::string::npos);
    CHECK(est.slope > 0.45); // Lipschitz target still visible from the two good rows
}

TEST_CASE("empirical slope input validation") {
    ConjugacyProblem prob = identity_plane_problem();
    Vec x = Vec::dense({0.1, 0.1});
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {}, 4), ConfigError);
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {1e-2, 1e-1}, 4), ConfigError);
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {1e-1, 1e-1}, 4), ConfigError);
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {1e-1, 0.0}, 4), ConfigError);
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {1e-1, 1e-2}, 0), ConfigError);
    // a single usable scale cannot support a slope
    CHECK_THROWS_AS((void)empirical_holder(prob, 0, x, {1e-1}, 4), ConfigError);
}

TEST_CASE("empirical slope on the bilateral space") {
    OperatorSequence seq =
        OperatorSequence::constant(Op::shift(WeightRule::two_sided(0.5, 2.0)));
    ProjectionFamily proj =
        ProjectionFamily::constant(Projector::indices(IndexPredicate::leq(0)));
    DichotomyCertificate cert = certify(seq, proj, -15, 15, 1.0, kLn2, Norm::Inf);
    ConjugacyProblem prob(NonlinearSystem(seq, PerturbationSequence::zero(), Norm::Inf),
                          cert, 1e-9, 1e-10);
    HolderEstimate est =
        empirical_holder(prob, 0, Vec::delta(0), {1e-1, 1e-2, 1e-3}, 4, 11);
    CHECK(std::abs(est.slope - 1.0) <= 0.02);
    CHECK(est.used_count == 3);
}

} // TEST_SUITE

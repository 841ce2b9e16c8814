#include <doctest.h>

#include <cmath>
#include <string>

#include "dicholin/systems.hpp"

using namespace dicholin;

namespace {

const double kLn2 = std::log(2.0);

FamilySpec two_letter_spec() {
    FamilySpec spec;
    spec.letters = {Matrix::diag({0.5, 2.0}), Matrix::diag({1.0 / 3.0, 3.0})};
    spec.lambdas = {kLn2, std::log(3.0)};
    spec.splitting = Matrix::diag({1.0, 0.0});
    spec.itinerary = ItineraryMap::periodic({0, 1});
    return spec;
}

FamilySpec connector_spec(Matrix u) {
    FamilySpec spec;
    spec.letters = {Matrix::diag({0.5, 2.0})};
    spec.lambdas = {kLn2};
    spec.splitting = Matrix::diag({1.0, 0.0});
    spec.connector = std::move(u);
    spec.itinerary = ItineraryMap::periodic({0, 1}); // letter, connector, letter, ...
    return spec;
}

std::string thrown_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_SUITE("systems") {

TEST_CASE("weighted shift generator certifies the exact constants") {
    ShiftSpec spec;
    spec.omega = WeightRule::two_sided(0.5, 2.0);
    GeneratedSystem sys = make_weighted_shift(spec);
    CHECK(sys.cert.D == 1.0);
    CHECK(sys.cert.lambda == kLn2);
    CHECK(sys.cert.report.passed());
    CHECK(sys.cert.report.splitting.worst_margin >= -1e-12);
    CHECK(sys.cert.report.stable_decay.worst_margin >= -1e-12);
    CHECK(sys.cert.report.unstable_decay.worst_margin >= -1e-12);

    REQUIRE(sys.bounded_witness.has_value());
    CHECK((*sys.bounded_witness - Vec::delta(0)).is_zero());
    auto ev = check_full_orbit_bounded(sys.seq, *sys.bounded_witness, -30, 30, 1.0 + 1e-12,
                                       Norm::Inf);
    CHECK(ev.witness);
    CHECK(ev.max_norm == doctest::Approx(1.0));
}

TEST_CASE("weighted shift with a moved crossing") {
    ShiftSpec spec;
    spec.omega = WeightRule::two_sided(0.4, 2.5, 3);
    spec.stable_upper = 0.4;
    spec.unstable_lower = 2.5;
    spec.crossing = 3;
    GeneratedSystem sys = make_weighted_shift(spec);
    CHECK(sys.cert.lambda == doctest::Approx(std::min(-std::log(0.4), std::log(2.5))));
    REQUIRE(sys.bounded_witness.has_value());
    CHECK((*sys.bounded_witness - Vec::delta(3)).is_zero());
}

TEST_CASE("pure contraction variant has no witness orbit") {
    ShiftSpec spec;
    spec.omega = WeightRule::constant(0.5);
    spec.contraction_only = true;
    GeneratedSystem sys = make_weighted_shift(spec);
    CHECK(sys.cert.lambda == doctest::Approx(kLn2));
    CHECK(sys.cert.report.passed());
    CHECK(!sys.bounded_witness.has_value());
    // whole space stable: the projector keeps every delta
    CHECK((sys.proj.at(7).apply(Vec::delta(12)) - Vec::delta(12)).is_zero());
}

TEST_CASE("weighted shift rejects misdeclared bounds") {
    ShiftSpec spec;
    spec.omega = WeightRule::two_sided(0.95, 2.0);
    spec.stable_upper = 0.9; // lies about the stable side
    CHECK(thrown_message([&] { (void)make_weighted_shift(spec); })
              .find("stable-side bound") != std::string::npos);

    ShiftSpec slow;
    slow.omega = WeightRule::two_sided(0.5, 2.0);
    slow.unstable_lower = 3.0; // lies about the unstable side
    CHECK(thrown_message([&] { (void)make_weighted_shift(slow); })
              .find("unstable-side bound") != std::string::npos);

    ShiftSpec unit;
    unit.stable_upper = 1.0;
    CHECK_THROWS_AS((void)make_weighted_shift(unit), ConfigError);

    ShiftSpec flat;
    flat.unstable_lower = 1.0;
    CHECK_THROWS_AS((void)make_weighted_shift(flat), ConfigError);

    ShiftSpec dead;
    dead.omega = WeightRule{0, {0.5, 0.0, 2.0}};
    CHECK(thrown_message([&] { (void)make_weighted_shift(dead); })
              .find("away from zero") != std::string::npos);
}

TEST_CASE("dimension exchange generator") {
    GeneratedSystem sys = make_dimension_exchange();
    CHECK(sys.cert.D == 1.0);
    CHECK(sys.cert.lambda == kLn2);
    CHECK(sys.cert.report.passed());
    CHECK(sys.cert.report.nesting.worst_margin >= -1e-12);

    // stable space grows from the first axis to the whole plane at time 0
    Vec e2 = Vec::unit(2, 1);
    CHECK(sys.proj.at(-1).apply(e2).is_zero());
    CHECK((sys.proj.at(0).apply(e2) - e2).is_zero());
    CHECK((sys.proj.at(5).apply(e2) - e2).is_zero());

    REQUIRE(sys.bounded_witness.has_value());
    auto ev = check_full_orbit_bounded(sys.seq, *sys.bounded_witness, -30, 30, 1.0 + 1e-12,
                                       Norm::Inf);
    CHECK(ev.witness);
    CHECK(ev.tails_ok);
    CHECK(ev.max_norm == doctest::Approx(1.0));
}

TEST_CASE("two-letter family without connector keeps the slowest rate") {
    GeneratedSystem sys = make_family_switch(two_letter_spec());
    CHECK(sys.cert.D == 1.0);
    CHECK(sys.cert.lambda == kLn2);
    CHECK(sys.cert.report.passed());
    CHECK(!sys.mixes_unstable_into_stable);
}

TEST_CASE("family letters must honour their declared rates") {
    FamilySpec weak = two_letter_spec();
    weak.letters[0] = Matrix::diag({0.6, 2.0}); // contracts slower than rate log 2
    CHECK(thrown_message([&] { (void)make_family_switch(weak); })
              .find("contraction on the stable space") != std::string::npos);

    FamilySpec sluggish = two_letter_spec();
    sluggish.letters[1] = Matrix::diag({1.0 / 3.0, 2.0}); // expands slower than rate log 3
    CHECK(thrown_message([&] { (void)make_family_switch(sluggish); })
              .find("does not expand the unstable space") != std::string::npos);

    FamilySpec leaky = two_letter_spec();
    leaky.letters[0] = Matrix::from_rows({{0.5, 0.0}, {0.1, 2.0}});
    CHECK(thrown_message([&] { (void)make_family_switch(leaky); })
              .find("does not keep the stable space") != std::string::npos);

    FamilySpec back = two_letter_spec();
    back.letters[0] = Matrix::from_rows({{0.5, 0.1}, {0.0, 2.0}});
    CHECK(thrown_message([&] { (void)make_family_switch(back); })
              .find("unstable space backward") != std::string::npos);

    FamilySpec shape = two_letter_spec();
    shape.lambdas = {kLn2};
    CHECK_THROWS_AS((void)make_family_switch(shape), ConfigError);

    FamilySpec skew = two_letter_spec();
    skew.splitting = Matrix::diag({1.0, 0.5}); // not idempotent
    CHECK_THROWS_AS((void)make_family_switch(skew), ConfigError);

    FamilySpec hollow = two_letter_spec();
    hollow.itinerary.letters.clear();
    CHECK_THROWS_AS((void)make_family_switch(hollow), ConfigError);

    FamilySpec alien = two_letter_spec();
    alien.itinerary = ItineraryMap::periodic({0, 2}); // no such letter
    CHECK(thrown_message([&] { (void)make_family_switch(alien); })
              .find("out of range") != std::string::npos);
}

TEST_CASE("shear connector is rejected by the backward invariance test") {
    Matrix shear = Matrix::from_rows({{1.2, 0.5}, {0.0, 1.0 / 1.2}});
    CHECK(thrown_message([&] { (void)make_family_switch(connector_spec(shear)); })
              .find("connector inverse must map the unstable space into itself") !=
          std::string::npos);
}

TEST_CASE("diagonal connector passes with the halved rate") {
    GeneratedSystem sys = make_family_switch(connector_spec(Matrix::diag({1.2, 1.0 / 1.2})));
    CHECK(sys.cert.report.passed());
    // constants go through the iterative 2-norm estimate, so compare at its accuracy
    CHECK(sys.cert.lambda == doctest::Approx((kLn2 - std::log(1.2)) / 2.0).epsilon(1e-9));
    CHECK(sys.cert.D == doctest::Approx(std::sqrt(2.4)).epsilon(1e-9));
    // the two-step product contracts stable vectors by exactly e^{-2 lambda}
    CHECK(std::exp(-2.0 * sys.cert.lambda) == doctest::Approx(0.6).epsilon(1e-9));
    Vec e1 = Vec::unit(2, 0);
    CHECK(transition(sys.seq, 2, 0, e1).norm(Norm::Two) == doctest::Approx(0.6));
    CHECK(!sys.mixes_unstable_into_stable);
}

TEST_CASE("connector norms must stay under the family rate") {
    CHECK(thrown_message([&] {
              (void)make_family_switch(connector_spec(Matrix::diag({2.5, 0.4})));
          }).find("connector norms must satisfy") != std::string::npos);
    // the inverse norm is checked too
    CHECK(thrown_message([&] {
              (void)make_family_switch(connector_spec(Matrix::diag({1.2, 0.4})));
          }).find("connector norms must satisfy") != std::string::npos);
    CHECK_THROWS_AS(
        (void)make_family_switch(connector_spec(Matrix::diag({2.2, 0.5}))), ConfigError);
}

TEST_CASE("consecutive connectors are rejected wherever they hide") {
    FamilySpec wrap = connector_spec(Matrix::diag({1.2, 1.0 / 1.2}));
    wrap.itinerary = ItineraryMap::periodic({0, 1, 1});
    CHECK(thrown_message([&] { (void)make_family_switch(wrap); })
              .find("never appear in pairs") != std::string::npos);

    // windowed map whose constant right tail repeats the connector
    FamilySpec tail = connector_spec(Matrix::diag({1.2, 1.0 / 1.2}));
    tail.itinerary = ItineraryMap::windowed(0, {0, 1});
    CHECK(thrown_message([&] { (void)make_family_switch(tail); })
              .find("never appear in pairs") != std::string::npos);

    // and the constant left tail
    FamilySpec head = connector_spec(Matrix::diag({1.2, 1.0 / 1.2}));
    head.itinerary = ItineraryMap::windowed(0, {1, 0});
    CHECK(thrown_message([&] { (void)make_family_switch(head); })
              .find("never appear in pairs") != std::string::npos);

    // a windowed patch whose tails are plain letters is fine
    FamilySpec ok = connector_spec(Matrix::diag({1.2, 1.0 / 1.2}));
    ok.itinerary = ItineraryMap::windowed(-2, {0, 1, 0, 1, 0});
    CHECK(make_family_switch(ok).cert.report.passed());
}

TEST_CASE("verification failure carries its report") {
    VerificationReport rep;
    rep.stable_decay.passed = false;
    rep.stable_decay.worst_margin = -0.25;
    VerificationFailure err("window check failed", rep);
    CHECK(!err.report().passed());
    CHECK(err.report().stable_decay.worst_margin == doctest::Approx(-0.25));
    CHECK(std::string(err.what()).find("window check failed") != std::string::npos);
}

TEST_CASE("translation family from the bounded orbit") {
    GeneratedSystem sys = make_dimension_exchange(-20, 20);
    NonuniquenessWitness w = make_nonuniqueness_witness(sys.seq, sys.proj, *sys.bounded_witness,
                                                        -20, 20, 1.0 + 1e-9, Norm::Inf);
    CHECK(w.sup_offset == doctest::Approx(1.0));
    CHECK(w.evidence.witness);
    CHECK(w.evidence.tails_ok);

    Vec e2 = Vec::unit(2, 1);
    CHECK((w.offset_at(0) - e2).is_zero());
    CHECK((w.offset_at(-1) - Vec::dense({0.0, 0.5})).norm(Norm::Inf) <= 1e-15);
    CHECK((w.offset_at(3) - Vec::dense({0.0, 0.125})).norm(Norm::Inf) <= 1e-15);
    CHECK_THROWS_AS((void)w.offset_at(21), ConfigError);

    // exact equivariance: applying the family commutes with the dynamics
    Vec v = Vec::dense({0.7, -0.2});
    for (long n : {-5L, -1L, 0L, 4L}) {
        Vec lhs = sys.seq.at(n).apply(w.apply(n, v));
        Vec rhs = w.apply(n + 1, sys.seq.at(n).apply(v));
        CHECK((lhs - rhs).norm(Norm::Inf) <= 1e-14);
    }

    // the offset leaves the admissible subspace exactly once, at the switch
    REQUIRE(w.range_dist.size() == 41);
    int off = 0;
    for (size_t i = 0; i < w.range_dist.size(); ++i) {
        REQUIRE(w.range_dist[i].has_value());
        if (*w.range_dist[i] > 1e-12) {
            ++off;
            CHECK(static_cast<long>(i) - 20 == -1);
            CHECK(*w.range_dist[i] == doctest::Approx(0.5));
        }
    }
    CHECK(off == 1);
}

TEST_CASE("translation family refuses unbounded seeds") {
    GeneratedSystem sys = make_dimension_exchange(-20, 20);
    CHECK(thrown_message([&] {
              (void)make_nonuniqueness_witness(sys.seq, sys.proj, Vec::unit(2, 0), -20, 20,
                                               1.0 + 1e-9, Norm::Inf);
          }).find("not bounded") != std::string::npos);
}

} // TEST_SUITE

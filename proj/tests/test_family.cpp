#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "torcan/family.hpp"
#include "torcan/singular.hpp"

#include "oracles.hpp"

using namespace torcan;
using family::LambdaProfile;
using family::SegmentLadder;

namespace {

LambdaProfile fold_base(int sign) {
    const curve::SlowCurveModel model(0.5);
    return LambdaProfile::fold(sign, 2.0, model, -0.82, 0.82, 2.0);
}

} // namespace

TEST_CASE("bump formula matches the published example") {
    // [A,B] = [0.2, 0.4], I = 10, Delta = 0.1 -> plateau 55, delta0 ~ 1.818e-3
    auto p = bump(fold_base(+1), 0.2, 0.4, 10.0, 1.0, 0.1);
    REQUIRE(p.plateaus().size() == 1);
    const auto& pl = p.plateaus().front();
    CHECK(pl.value == doctest::Approx(55.0));
    CHECK(2.0 * pl.shoulder == doctest::Approx(0.2 * 0.1 / 11.0).epsilon(1e-12));

    // segment length equal to I+1 gives plateau magnitude 1
    auto q = bump(fold_base(+1), -0.7, 0.5, 0.2, 1.0, 0.1);
    CHECK(q.plateaus().front().value == doctest::Approx(1.2 / 1.2));
}

TEST_CASE("bump integral exceeds I and shoulders stay below Delta") {
    const double I = 10.0, Delta = 0.1;
    auto p = bump(fold_base(+1), 0.2, 0.4, I, 1.0, Delta);
    const double plateau_part =
        oracles::simpson([&](double y) { return p.value(y); }, 0.2, 0.4);
    CHECK(std::fabs(plateau_part) > I);

    const double w = p.plateaus().front().shoulder;
    const double shoulders = oracles::simpson([&](double y) { return p.value(y); }, 0.2 - w, 0.2) +
                             oracles::simpson([&](double y) { return p.value(y); }, 0.4, 0.4 + w);
    CHECK(std::fabs(shoulders) < Delta);
}

TEST_CASE("bump rejects overlaps and bad arguments") {
    auto p = bump(fold_base(-1), 0.2, 0.4, 5.0, 1.0, 0.05);
    CHECK_THROWS_AS(bump(p, 0.3, 0.5, 5.0, 1.0, 0.05), ConstructionError);
    CHECK_THROWS_AS(bump(p, 0.5, 0.5, 5.0, 1.0, 0.05), ConstructionError);
    CHECK_THROWS_AS(bump(p, 0.5, 0.6, 5.0, 1.0, 1.5), ConstructionError);
    // shoulder would leave the extended core
    CHECK_THROWS_AS(bump(fold_base(-1), 0.5, 0.8199999, 5.0, 1.0, 0.5), ConstructionError);
}

TEST_CASE("ladder validation and conventions") {
    CHECK_THROWS_AS(SegmentLadder(1, {-0.8, -0.45, -0.45, -0.1}, {0.8, 0.7, 0.6, 0.45, 0.1}),
                    DomainError);
    const auto lad = SegmentLadder::fixture(1);
    CHECK(lad.a(-1) == -1.0);
    CHECK(lad.b(4) == lad.a(3));  // b_{2n+2} = a_{2n+1}
    CHECK(lad.a(4) == lad.b(3));  // a_{2n+2} = b_{2n+1}
    CHECK(lad.a(5) == lad.b(2));  // a_{2n+3} = b_{2n}
    CHECK(lad.index_out_of_range(5));
    CHECK_FALSE(lad.index_out_of_range(4));
    CHECK(lad.seg_a(2).lo == lad.a(3));
    CHECK(lad.seg_a(2).hi == lad.b(3));
    CHECK(lad.cycle_segments().size() == 3);
}

TEST_CASE("build_profiles on the acceptance fixture") {
    const curve::SlowCurveModel model(0.5);
    const auto built = family::build_profiles(model, SegmentLadder::fixture(1));
    CHECK(built.report.pass());
    CHECK(built.report.min_margin() > 0.0);

    // lambda^- plateaus on omega^b_0 = [b_0, b_-1] and omega^a_2; lambda^+
    // on omega^a_1 and omega^b_1.
    CHECK(built.lambda_minus.plateaus().size() == 2);
    CHECK(built.lambda_plus.plateaus().size() == 2);
    CHECK(built.lambda_minus.plateau_at(0.75).has_value());
    CHECK(built.lambda_minus.plateau_at(0.0).has_value());
    CHECK(built.lambda_plus.plateau_at(-0.5).has_value());
    CHECK(built.lambda_plus.plateau_at(0.5).has_value());
}

TEST_CASE("profiles have the right sign and are constant on ladder segments") {
    const curve::SlowCurveModel model(0.5);
    const auto lad = SegmentLadder::fixture(1);
    const auto built = family::build_profiles(model, lad);
    for (int i = 0; i <= 200; ++i) {
        const double y = -0.999 + 1.998 * i / 200.0;
        CHECK(built.lambda_minus.value(y) < 0.0);
        CHECK(built.lambda_plus.value(y) > 0.0);
    }
    for (const auto& seg : lad.cycle_segments()) {
        const double v0m = built.lambda_minus.value(seg.lo);
        const double v0p = built.lambda_plus.value(seg.lo);
        for (int i = 1; i <= 16; ++i) {
            const double y = seg.lo + (seg.hi - seg.lo) * i / 16.0;
            CHECK(built.lambda_minus.value(y) == doctest::Approx(v0m).epsilon(1e-14));
            CHECK(built.lambda_plus.value(y) == doctest::Approx(v0p).epsilon(1e-14));
        }
    }
}

TEST_CASE("profiles are monotone between plateaus") {
    const curve::SlowCurveModel model(0.5);
    const auto built = family::build_profiles(model, SegmentLadder::fixture(1));
    // between the omega^a_2 plateau and the omega^b_0 plateau, |lambda^-|
    // first descends to baseline and stays until the next shoulder
    const auto& plats = built.lambda_minus.plateaus();
    REQUIRE(plats.size() == 2);
    const double from = plats[0].outer_hi(), to = plats[1].outer_lo();
    double prev = std::fabs(built.lambda_minus.value(from));
    bool descending = true;
    for (int i = 1; i <= 64; ++i) {
        const double y = from + (to - from) * i / 64.0;
        const double cur = std::fabs(built.lambda_minus.value(y));
        if (descending && cur > prev + 1e-12) descending = false;
        prev = cur;
    }
    CHECK(descending);
}

TEST_CASE("degenerate ladders") {
    const curve::SlowCurveModel model(0.5);
    const auto built0 = family::build_profiles(model, SegmentLadder::fixture(0));
    CHECK(built0.report.pass());
    int applicable = 0;
    for (const auto& row : built0.report.rows) {
        if (!row.skipped) ++applicable;
    }
    CHECK(applicable == 2); // the other rows hit out-of-range indices
}

TEST_CASE("baseline-only profiles violate at least one inequality") {
    const auto lad = SegmentLadder::fixture(1);
    const auto rep = family::check_inequalities(fold_base(-1), fold_base(+1), lad);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("gamma margin monotonicity") {
    const curve::SlowCurveModel model(0.5);
    const auto lad = SegmentLadder::fixture(1);
    family::BuildOptions o1, o2;
    o2.gamma = 2.0;
    const auto b1 = family::build_profiles(model, lad, o1);
    const auto b2 = family::build_profiles(model, lad, o2);
    for (std::size_t i = 0; i < b1.report.rows.size(); ++i) {
        if (b1.report.rows[i].skipped) continue;
        CHECK(b2.report.rows[i].margin >= b1.report.rows[i].margin - 1e-9);
    }
}

TEST_CASE("assembled field basics") {
    const curve::SlowCurveModel model(0.5);
    const auto built = family::build_profiles(model, SegmentLadder::fixture(1));
    const auto field = family::assemble_field(model, built.lambda_minus, built.lambda_plus);

    // f positive between the branches, negative outside
    CHECK(field.f<double>(0.0, 0.0) > 0.0);
    for (double y : {-2.5, -0.5, 0.0, 1.7, 3.0}) {
        CHECK(field.f<double>(geom::kPi, y) < 0.0);
    }

    // 2*pi periodicity at scattered points
    oracles::Lcg rng;
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-geom::kPi, geom::kPi);
        const double y = rng.uniform(-geom::kPi, geom::kPi);
        CHECK(field.f<double>(x + geom::kTwoPi, y) ==
              doctest::Approx(field.f<double>(x, y)).epsilon(1e-12));
        CHECK(field.f<double>(x, y + geom::kTwoPi) ==
              doctest::Approx(field.f<double>(x, y)).epsilon(1e-12));
    }

    // zero set: f vanishes on both branches
    for (int i = 1; i < 40; ++i) {
        const double y = -1.0 + 2.0 * i / 40.0;
        const double xm = model.branch(curve::BranchSign::attracting, y);
        const double xp = model.branch(curve::BranchSign::repelling, y);
        CHECK(std::fabs(field.f<double>(xm, y)) < 1e-12 * 100.0);
        CHECK(std::fabs(field.f<double>(xp, y)) < 1e-12 * 100.0);
    }
}

TEST_CASE("field trace equals the lambda profiles on the whole strip") {
    const curve::SlowCurveModel model(0.5);
    const auto built = family::build_profiles(model, SegmentLadder::fixture(1));
    const auto field = family::assemble_field(model, built.lambda_minus, built.lambda_plus);
    for (int i = 1; i < 400; ++i) {
        const double y = -1.0 + 2.0 * i / 400.0;
        const double xm = model.branch(curve::BranchSign::attracting, y);
        const double xp = model.branch(curve::BranchSign::repelling, y);
        const double lm = built.lambda_minus.value(y);
        const double lp = built.lambda_plus.value(y);
        CHECK(field.fx<double>(xm, y) == doctest::Approx(lm).epsilon(1e-8));
        CHECK(field.fx<double>(xp, y) == doctest::Approx(lp).epsilon(1e-8));
    }
}

TEST_CASE("constant-on-core profiles give the symmetric trace") {
    const curve::SlowCurveModel model(0.5);
    const auto field = family::assemble_field(model, fold_base(-1), fold_base(+1));
    const double xm = model.branch(curve::BranchSign::attracting, 0.0);
    CHECK(field.fx<double>(xm, 0.0) == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK_THROWS_AS(
        family::assemble_field(model, LambdaProfile::constant(-2.0), LambdaProfile::constant(2.0)),
        DomainError);
}

TEST_CASE("family JSON round-trips bit-exactly") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, SegmentLadder::fixture(1));
    const std::string text = family::family_to_json(fam);
    const auto fam2 = family::family_from_json(text);
    CHECK(family::family_to_json(fam2) == text);

    // identical predictions after the round trip
    singular::ReleaseMap m1(fam.lambda_minus, fam.lambda_plus, fam.sections);
    singular::ReleaseMap m2(fam2.lambda_minus, fam2.lambda_plus, fam2.sections);
    for (double y : {-0.7, -0.2, 0.4}) {
        CHECK(m1.beta(y) == m2.beta(y));
    }
}

TEST_CASE("malformed family JSON is a domain error") {
    CHECK_THROWS_AS(family::family_from_json("{ not json"), DomainError);
    CHECK_THROWS_AS(family::family_from_json("{\"curve\": {}}"), DomainError);
}

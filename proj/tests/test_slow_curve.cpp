#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torcan/family.hpp"
#include "torcan/ladder.hpp"
#include "torcan/slow_curve.hpp"

using namespace torcan;
using curve::BranchSign;
using curve::SlowCurveModel;

TEST_CASE("profile a(y) pins the folds") {
    const SlowCurveModel model(0.5);
    CHECK(model.a<double>(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(model.a<double>(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(model.a<double>(0.0) < 1.0);
    CHECK(model.a<double>(2.0) > 1.0);
    CHECK(model.a<double>(geom::kPi) > 1.0);
    CHECK(model.a<double>(geom::kPi) > -1.0);
}

TEST_CASE("model rejects out-of-range amplitudes") {
    CHECK_THROWS_AS(SlowCurveModel(0.0), DomainError);
    CHECK_THROWS_AS(SlowCurveModel(-1.0), DomainError);
    CHECK_THROWS_AS(SlowCurveModel(5.0), DomainError); // > 2/(1-cos 1)
}

TEST_CASE("branch evaluation") {
    const SlowCurveModel model(0.5);
    // closed-form oracle: arccos(1 - 0.5 (1 - cos 1))
    const double expected = std::acos(1.0 - 0.5 * (1.0 - std::cos(1.0)));
    CHECK(model.branch(BranchSign::attracting, 0.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(model.branch(BranchSign::repelling, 0.0) ==
          doctest::Approx(-expected).epsilon(1e-14));

    // branches merge at the folds
    CHECK(std::fabs(model.branch(BranchSign::attracting, 1.0 - 1e-12)) < 1e-5);
    CHECK(std::fabs(model.branch(BranchSign::attracting, -1.0 + 1e-12)) < 1e-5);

    CHECK_THROWS_AS(model.branch(BranchSign::attracting, 1.0), DomainError);
    CHECK_THROWS_AS(model.branch(BranchSign::repelling, -1.5), DomainError);
}

TEST_CASE("jump points are (0, +-1) for any amplitude") {
    for (double c : {0.1, 0.5, 1.0, 2.0}) {
        const SlowCurveModel model(c, 0.3 * c);
        const auto [gm, gp] = model.jump_points();
        CHECK(gm.x == 0.0);
        CHECK(gm.y == 1.0);
        CHECK(gp.x == 0.0);
        CHECK(gp.y == -1.0);
        CHECK(gm.y - gp.y == 2.0);
    }
}

TEST_CASE("branch ordering and pinch") {
    const SlowCurveModel model(0.5);
    double prev_gap = -1.0;
    for (double y : {0.0, 0.3, 0.6, 0.9, 0.99}) {
        const double xm = model.branch(BranchSign::attracting, y);
        const double xp = model.branch(BranchSign::repelling, y);
        CHECK(xp < 0.0);
        CHECK(xm > 0.0);
        const double gap = xm - xp;
        if (y > 0.0) CHECK(gap < prev_gap); // shrinks toward the fold
        prev_gap = gap;
    }
}

TEST_CASE("section set validation") {
    curve::SectionSet sec;
    CHECK_NOTHROW(sec.validate());
    CHECK(sec.i_delta_lo() == doctest::Approx(-0.98));
    CHECK(sec.alpha_plus() == doctest::Approx(0.99));

    curve::SectionSet bad = sec;
    bad.delta_plus = sec.delta; // must be strictly smaller
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("nondegeneracy validator on the built fixture") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    const auto rep = family::validate_nondegenerate(fam.field, fam.model, 200);
    CHECK(rep.pass);
    CHECK(rep.fold_count == 2);
    CHECK(rep.min_abs_fx >= 1e-8);
    CHECK(rep.min_abs_fxx >= 1e-6);
    CHECK(rep.min_abs_fy >= 1e-6);
}

namespace {

// Field wrapper that kills f'_y near the forward jump point.
struct BrokenField {
    const family::FastField* base;

    template <class S>
    S damp(S x, S y) const {
        const S dx = x, dy = y - S(1.0);
        const S r2 = dx * dx + dy * dy;
        return r2 / (r2 + S(1e-4));
    }
    template <class S>
    S f(S x, S y) const {
        return damp(x, y) * base->f<S>(x, y);
    }
    template <class S>
    S fx(S x, S y) const {
        return base->fx<S>(x, y); // unused by the fy check
    }
    template <class S>
    S fxx(S x, S y) const {
        return base->fxx<S>(x, y);
    }
    template <class S>
    S fy(S x, S y) const {
        return damp(x, y) * base->fy<S>(x, y); // vanishes at G^-
    }
};

} // namespace

TEST_CASE("validator flags a degenerate jump point") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    BrokenField broken{&fam.field};
    const auto rep = family::validate_nondegenerate(broken, fam.model, 200);
    CHECK_FALSE(rep.pass);
    bool fy_failure = false;
    for (const auto& msg : rep.failures) {
        if (msg.find("f'_y") != std::string::npos) fy_failure = true;
    }
    CHECK(fy_failure);
}

TEST_CASE("validator rejects non-positive grid") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    CHECK_THROWS_AS(family::validate_nondegenerate(fam.field, fam.model, 0), DomainError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torcan/family.hpp"
#include "torcan/flow.hpp"
#include "torcan/singular.hpp"

using namespace torcan;

namespace {

struct ConstField {
    double value = 1.0;
    template <class S>
    S f(S, S) const {
        return S(value);
    }
    template <class S>
    S fx(S, S) const {
        return S(0.0);
    }
};

// dx/dy = sin(x) style field with nonzero variational part.
struct SineField {
    template <class S>
    S f(S x, S) const {
        return sc_sin(x) + S(1.5);
    }
    template <class S>
    S fx(S x, S) const {
        return sc_cos(x);
    }
};

const family::Family& fixture_family() {
    static const family::Family fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    return fam;
}

flow::FlowConfig cfg_std(double eps) {
    flow::FlowConfig cfg;
    cfg.eps = eps;
    return cfg;
}

} // namespace

TEST_CASE("constant field advances linearly with zero L") {
    ConstField field{0.25};
    const auto res = flow::advance(field, cfg_std(1.0), 0.5, 0.0, geom::kTwoPi);
    CHECK(res.x_lift_end == doctest::Approx(0.5 + 0.25 * geom::kTwoPi).epsilon(1e-12));
    CHECK(res.x_end ==
          doctest::Approx(geom::wrap_angle(0.5 + 0.25 * geom::kTwoPi)).epsilon(1e-12));
    CHECK(res.L == doctest::Approx(0.0));
}

TEST_CASE("advance input validation") {
    ConstField field{1.0};
    CHECK_THROWS_AS(flow::advance(field, cfg_std(1.0), 0.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(flow::advance_backward(field, cfg_std(1.0), 0.0, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(flow::advance(field, cfg_std(1.0), 0.0, 0.0, 20.0), DomainError);
    flow::FlowConfig bad = cfg_std(0.01); // eps < 0.03 requires the extended tier
    CHECK_THROWS_AS(flow::advance(field, bad, 0.0, 0.0, 1.0), DomainError);
    bad.tier = flow::Tier::extended;
    CHECK_NOTHROW(flow::advance(field, bad, 0.0, 0.0, 1.0));
}

TEST_CASE("reversal consistency on a smooth field") {
    SineField field;
    const double x0 = 0.3, y0 = -1.0, y1 = 2.0;
    const auto fwd = flow::advance(field, cfg_std(0.5), x0, y0, y1);
    const auto back = flow::advance_backward(field, cfg_std(0.5), fwd.x_end, y1, y0);
    CHECK(back.x_end == doctest::Approx(x0).epsilon(1e-8));
    // L over the reversed traversal cancels
    CHECK(back.L == doctest::Approx(-fwd.L).epsilon(1e-7));
}

TEST_CASE("tolerance refinement self-consistency") {
    SineField field;
    auto c1 = cfg_std(0.5);
    auto c2 = cfg_std(0.5);
    c2.rtol = c1.rtol / 2.0;
    const auto r1 = flow::advance(field, c1, 0.3, 0.0, 3.0);
    const auto r2 = flow::advance(field, c2, 0.3, 0.0, 3.0);
    CHECK(std::fabs(r1.x_end - r2.x_end) < 10.0 * c1.rtol * 3.0 + 1e-11);
}

TEST_CASE("extended tier agrees with standard tier") {
    SineField field;
    auto cs = cfg_std(0.5);
    auto cx = cfg_std(0.5);
    cx.tier = flow::Tier::extended;
    cx.rtol = 1e-18;
    cx.atol = 1e-20;
    const auto rs = flow::advance(field, cs, 0.3, 0.0, 3.0);
    const auto rx = flow::advance(field, cx, 0.3, 0.0, 3.0);
    CHECK(rs.x_end == doctest::Approx(rx.x_end).epsilon(1e-9));
}

TEST_CASE("fixture orbit lands on the attracting branch (Fenichel)") {
    const auto& fam = fixture_family();
    const auto res = flow::advance(fam.field, cfg_std(0.08), 0.0, -0.5, 0.9);
    const double target = fam.model.branch(curve::BranchSign::attracting, 0.9);
    CHECK(std::fabs(res.x_end - target) < 5.0 * 0.08);

    // distance at y = 0 halves within [0.3, 0.8] when eps halves
    auto dist = [&](double eps) {
        const auto r = flow::advance(fam.field, cfg_std(eps), 0.0, -0.9, 0.0);
        return std::fabs(r.x_end - fam.model.branch(curve::BranchSign::attracting, 0.0));
    };
    const double ratio = dist(0.05) / dist(0.1);
    CHECK(ratio > 0.3);
    CHECK(ratio < 0.8);
}

TEST_CASE("backward orbit hugs the repelling branch") {
    const auto& fam = fixture_family();
    const auto res = flow::advance_backward(fam.field, cfg_std(0.08), geom::kPi, 0.5, -0.9);
    const double target = fam.model.branch(curve::BranchSign::repelling, -0.9);
    CHECK(std::fabs(res.x_end - target) < 5.0 * 0.08);
}

TEST_CASE("log-derivative asymptotics toward Phi (Theorem-6 style decay)") {
    const auto& fam = fixture_family();
    const double phi_ref = singular::phi(fam.lambda_minus, -0.5, 0.5);
    const double x0 = fam.model.branch(curve::BranchSign::attracting, -0.5);
    double prev = 1e300;
    for (double eps : {0.1, 0.05}) {
        const auto res = flow::advance(fam.field, cfg_std(eps), x0, -0.5, 0.5);
        const double err = std::fabs(eps * res.L - phi_ref);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("rotation phase contributes no net L over full turns") {
    // d/dx log(a - cos x) integrates f'_x / f exactly, so full rotations at
    // fixed Lambda gain nothing and L stays O(1) instead of O(1/eps).
    const auto& fam = fixture_family();
    for (double eps : {0.1, 0.05}) {
        const auto res = flow::advance(fam.field, cfg_std(eps), 0.0, 1.5, 2.8);
        CHECK(std::fabs(res.L) < 5.0);
    }
}

TEST_CASE("event completeness during the rotation phase") {
    const auto& fam = fixture_family();
    flow::AdvanceOptions opt;
    opt.collect_events = true;
    const auto res = flow::advance(fam.field, cfg_std(0.05), 0.1, 1.05, geom::kPi - 0.01, opt);
    int zero = 0, pi = 0;
    for (const auto& ev : res.events) {
        (ev.section == 0.0 ? zero : pi)++;
    }
    CHECK(zero >= 3);
    CHECK(std::abs(zero - pi) <= 1);
}

TEST_CASE("transport_interval") {
    const auto& fam = fixture_family();
    ConstField flat{1.0};

    flow::IntervalTrack track{0.0, 0.25, std::log(1e-3), false};
    const auto moved = flow::transport_interval(flat, cfg_std(1.0), track, 1.0);
    CHECK(moved.log_halfwidth == doctest::Approx(track.log_halfwidth)); // L = 0 segment

    // J^- transported forward to the cut contracts like Phi^- / eps
    const double eps = 0.08;
    const double alpha = fam.sections.alpha_minus();
    flow::IntervalTrack jm{alpha, fam.model.branch(curve::BranchSign::attracting, alpha),
                           std::log(1e-3), false};
    const auto at_cut = flow::transport_interval(fam.field, cfg_std(eps), jm, geom::kPi);
    const double phi_total = singular::phi(fam.lambda_minus, alpha, 1.0);
    const double predicted_drop = phi_total / eps; // negative
    const double actual_drop = at_cut.log_halfwidth - jm.log_halfwidth;
    CHECK(actual_drop < 0.0);
    CHECK(std::fabs(actual_drop - predicted_drop) < 0.35 * std::fabs(predicted_drop));

    // halfwidth must be narrow
    flow::IntervalTrack wide{0.0, 0.0, std::log(0.5), false};
    CHECK_THROWS_AS(flow::transport_interval(flat, cfg_std(1.0), wide, 1.0), DomainError);
}

TEST_CASE("saturation clamps with a sticky flag") {
    const auto& fam = fixture_family();
    auto cfg = cfg_std(0.08);
    cfg.log_cap = 30.0; // force the clamp on a deep slide
    flow::IntervalTrack jm{fam.sections.alpha_minus(),
                           fam.model.branch(curve::BranchSign::attracting,
                                            fam.sections.alpha_minus()),
                           std::log(1e-3), false};
    const auto moved = flow::transport_interval(fam.field, cfg, jm, geom::kPi);
    CHECK(moved.saturated);
    CHECK(moved.log_halfwidth >= -cfg.log_cap - std::fabs(std::log(1e-3)) - 1.0);
}

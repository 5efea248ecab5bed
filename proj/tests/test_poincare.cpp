#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torcan/family.hpp"
#include "torcan/hunter.hpp"
#include "torcan/poincare.hpp"
#include "torcan/singular.hpp"

using namespace torcan;

namespace {

struct Fixture {
    family::Family fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    singular::ReleaseMap rmap{fam.lambda_minus, fam.lambda_plus, fam.sections};
    std::vector<hunter::WindowRecord> windows =
        hunter::scan_windows(fam, 0.06, 0.12, {32, 14, std::nullopt});
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

poincare::SectionEngine engine_at(double eps) {
    return poincare::SectionEngine(fx().fam, hunter::make_flow_config(eps));
}

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

} // namespace

TEST_CASE("windows exist in the unit-test range") {
    REQUIRE(fx().windows.size() >= 2);
}

TEST_CASE("half map lands near beta at a window midpoint") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    const auto seg = fx().fam.ladder.seg_a(1);
    const double y0 = seg.mid();
    const auto oc = engine.half_map_minus(y0);
    REQUIRE(oc.defined);
    CHECK(std::fabs(oc.map.y_out - fx().rmap.beta(y0)) < 0.1);
    CHECK(oc.map.residual <= 1e-9);
    CHECK(oc.map.derivative < 0.0); // orientation-reversing half map

    // Q^+ continues to approximately beta(beta(y0))
    const auto oc2 = engine.half_map_plus(oc.map.y_out);
    REQUIRE(oc2.defined);
    CHECK(std::fabs(oc2.map.y_out - fx().rmap.beta(fx().rmap.beta(y0))) < 0.1);
    CHECK(oc2.map.residual <= 1e-9);
}

TEST_CASE("half map domain errors") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    CHECK_THROWS_AS(engine.half_map_minus(0.999), DomainError);
    CHECK_THROWS_AS(engine.half_map_plus(-3.0), DomainError);
}

TEST_CASE("full map is monotone where defined and chains multipliers") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    const auto seg = fx().fam.ladder.seg_a(1);

    double prev_q = -10.0;
    for (int i = 0; i <= 12; ++i) {
        const double y = seg.lo + (seg.hi - seg.lo) * i / 12.0;
        const auto oc = engine.full_map(y);
        REQUIRE(oc.defined);
        CHECK(oc.map.derivative > 0.0);
        if (i > 0) CHECK(oc.map.y_out > prev_q); // increasing composition
        prev_q = oc.map.y_out;
    }

    // chain rule: Q' equals the product of its half-map derivatives
    const double y0 = seg.mid();
    const auto q = engine.full_map(y0);
    const auto h1 = engine.half_map_minus(y0);
    const auto h2 = engine.half_map_plus(h1.map.y_out);
    CHECK(q.map.derivative ==
          doctest::Approx(h1.map.derivative * h2.map.derivative).epsilon(1e-12));
}

TEST_CASE("multiplier agrees with finite differences of the map") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    const double y0 = fx().fam.ladder.seg_a(1).mid();
    const double h = 1e-4;
    const auto qp = engine.full_map(y0 + h);
    const auto qm = engine.full_map(y0 - h);
    const auto q = engine.full_map(y0);
    REQUIRE(q.defined);
    REQUIRE(qp.defined);
    REQUIRE(qm.defined);
    const double fd = (qp.map.y_out - qm.map.y_out) / (2.0 * h);
    CHECK(q.map.derivative == doctest::Approx(fd).epsilon(5e-4));
}

TEST_CASE("full map undefined far from windows") {
    // midpoint between the first two detected windows (in 1/eps)
    const auto& ws = fx().windows;
    REQUIRE(ws.size() >= 2);
    const double gap_eps = 2.0 / (1.0 / ws[0].eps_mid + 1.0 / ws[1].eps_mid);
    const auto engine = engine_at(gap_eps);
    int defined = 0;
    for (int i = 0; i <= 40; ++i) {
        const double y =
            fx().fam.sections.i_delta_lo() +
            (fx().fam.sections.i_delta_hi() - fx().fam.sections.i_delta_lo()) * i / 40.0;
        if (engine.full_map(y).defined) ++defined;
    }
    CHECK(defined == 0);
}

TEST_CASE("find_cycles reproduces the singular census") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    const auto segs = fx().fam.ladder.cycle_segments();
    const auto records = engine.find_cycles(segs, 24);
    REQUIRE(records.size() == 3);

    const auto pred = singular::predict(fx().rmap, fx().fam.ladder);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(records[i].canard);
        CHECK(records[i].passes == 2);
        CHECK(records[i].multiplier > 0.0);
        CHECK(records[i].y_fixed > pred.cycles[0].seg_lo);
    }
    // y-sorted records: omega_a_1, omega_a_2, omega_b_1
    CHECK(records[0].segment_label == "omega_a_1");
    CHECK(records[0].stability == singular::Stability::attracting);
    CHECK(records[1].segment_label == "omega_a_2");
    CHECK(records[1].stability == singular::Stability::repelling);
    CHECK(records[2].segment_label == "omega_b_1");
    CHECK(records[2].stability == singular::Stability::attracting);
}

TEST_CASE("circle map on constant fields is a rigid rotation") {
    ConstField one{1.0};
    flow::FlowConfig cfg;
    cfg.eps = 1.0;
    const auto res = flow::advance(one, cfg, 0.3, -geom::kPi, geom::kPi);
    CHECK(res.x_lift_end - 0.3 == doctest::Approx(geom::kTwoPi).epsilon(1e-10));
    CHECK(res.x_end == doctest::Approx(0.3).epsilon(1e-9));

    ConstField two{2.0};
    const auto res2 = flow::advance(two, cfg, 0.3, -geom::kPi, geom::kPi);
    CHECK(res2.x_lift_end - 0.3 == doctest::Approx(2.0 * geom::kTwoPi).epsilon(1e-10));
}

TEST_CASE("fixture circle map is orientation preserving") {
    // The map contracts most of the circle by factors far below double
    // resolution, so images of nearby points coincide bitwise; monotone
    // is asserted up to that resolution.
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    double prev_lift = -1e300;
    for (int i = 0; i <= 24; ++i) {
        const double x = -geom::kPi + geom::kTwoPi * i / 24.0;
        const auto step = engine.circle_map(x);
        const double lift = x + step.displacement;
        if (i > 0) CHECK(lift >= prev_lift - 1e-4);
        prev_lift = lift;
        CHECK(std::isfinite(step.displacement));
    }
}

TEST_CASE("rotation number of the fixture is half-integer inside a window") {
    const double eps = fx().windows[0].eps_mid;
    const auto engine = engine_at(eps);
    const int N = 60;
    const double rho = engine.rotation_number(0.0, N);
    const double frac = rho - std::floor(rho);
    CHECK(std::fabs(frac - 0.5) <= 2.0 / N);
    CHECK_THROWS_AS(engine.rotation_number(0.0, 5), DomainError);
}

TEST_CASE("cut data matches transported tracks") {
    const double eps = 0.08;
    const auto engine = engine_at(eps);
    const auto [dp, dm] = hunter::tracks(fx().fam, hunter::make_flow_config(eps));
    CHECK(engine.cut().d_plus.center_x == doctest::Approx(dp.center_x));
    CHECK(engine.cut().d_minus.center_x == doctest::Approx(dm.center_x));

    // both widths contract at least like exp(-C/eps) with C > 0
    CHECK(dp.log_halfwidth < std::log(1e-3) - 1.0 / eps);
    CHECK(dm.log_halfwidth < std::log(1e-3) - 1.0 / eps);
}

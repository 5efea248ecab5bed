#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torcan/torus_geom.hpp"

#include "oracles.hpp"

using namespace torcan;
using namespace torcan::geom;

TEST_CASE("wrap_angle canonical values") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(-kPi));
    CHECK(wrap_angle(-kPi) == -kPi);
    CHECK(wrap_angle(kPi) == -kPi); // boundary tie resolves to -pi
    CHECK_THROWS_AS(wrap_angle(std::nan("")), DomainError);
    CHECK_THROWS_AS(wrap_angle(INFINITY), DomainError);
}

TEST_CASE("wrap_angle is idempotent and in range") {
    oracles::Lcg rng;
    for (int i = 0; i < 2000; ++i) {
        const double t = rng.uniform(-50.0, 50.0);
        const double w = wrap_angle(t);
        CHECK(w >= -kPi);
        CHECK(w < kPi);
        CHECK(wrap_angle(w) == w);
        CHECK(std::fabs(std::remainder(w - t, kTwoPi)) < 1e-12);
    }
}

TEST_CASE("arc_contains basic arcs") {
    const auto arc = OrientedArc::forward(0.0, kPi);
    CHECK(arc_contains(arc, kPi / 2));
    CHECK_FALSE(arc_contains(arc, -kPi / 2));

    const auto wrap_arc = OrientedArc::forward(kPi / 2, -kPi / 2); // through pi
    CHECK(arc_contains(wrap_arc, kPi));
    CHECK_FALSE(arc_contains(wrap_arc, 0.0));
}

TEST_CASE("arc endpoints always contained") {
    oracles::Lcg rng;
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(-kPi, kPi);
        const double b = rng.uniform(-kPi, kPi);
        const auto arc = OrientedArc::forward(a, b);
        CHECK(arc_contains(arc, a));
        CHECK(arc_contains(arc, b));
        const auto rev = OrientedArc::backward(a, b);
        CHECK(arc_contains(rev, a));
        CHECK(arc_contains(rev, b));
    }
}

TEST_CASE("circular_signed_gap") {
    CHECK(circular_signed_gap(0.3, 0.1) == doctest::Approx(0.2));
    CHECK(circular_signed_gap(-kPi + 0.1, kPi - 0.1) == doctest::Approx(0.2));
    CHECK(circular_signed_gap(1.234, 1.234) == 0.0);

    oracles::Lcg rng;
    for (int i = 0; i < 500; ++i) {
        const double u = rng.uniform(-10.0, 10.0);
        const double v = rng.uniform(-10.0, 10.0);
        const double g1 = circular_signed_gap(u, v);
        const double g2 = circular_signed_gap(v, u);
        if (std::fabs(std::fabs(g1) - kPi) > 1e-12) {
            CHECK(g1 + g2 == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torcan/dd.hpp"
#include "torcan/scalar.hpp"

#include "oracles.hpp"

using namespace torcan;

TEST_CASE("dd arithmetic keeps the residual word") {
    const DD a(1.0, 0.0);
    const DD tiny(1e-25);
    const DD s = a + tiny - a;
    CHECK(to_double(s) == doctest::Approx(1e-25));

    // (1 + eps_dd) * (1 - eps_dd) = 1 - eps_dd^2; invisible in double
    const DD e(1e-20);
    const DD p = (DD(1.0) + e) * (DD(1.0) - e);
    CHECK(to_double(p - DD(1.0)) == doctest::Approx(-1e-40).epsilon(1e-3));
}

TEST_CASE("dd division and sqrt") {
    const DD third = DD(1.0) / DD(3.0);
    const DD recon = third * DD(3.0) - DD(1.0);
    CHECK(std::fabs(to_double(recon)) < 1e-31);

    const DD r = dd_sqrt(DD(2.0));
    const DD back = r * r - DD(2.0);
    CHECK(std::fabs(to_double(back)) < 1e-31);
}

TEST_CASE("dd trig against double for moderate arguments") {
    for (double v : {0.0, 0.3, 1.0, -1.3, 2.9, -3.1, 7.7, 40.0, -150.0}) {
        CHECK(to_double(dd_sin(DD(v))) == doctest::Approx(std::sin(v)).epsilon(1e-13));
        CHECK(to_double(dd_cos(DD(v))) == doctest::Approx(std::cos(v)).epsilon(1e-13));
    }
}

TEST_CASE("dd trig pythagoras to double-word precision") {
    oracles::Lcg rng;
    for (int i = 0; i < 200; ++i) {
        const DD v(rng.uniform(-20.0, 20.0));
        const DD s = dd_sin(v), c = dd_cos(v);
        const DD unit = s * s + c * c - DD(1.0);
        CHECK(std::fabs(to_double(unit)) < 1e-29);
    }
}

TEST_CASE("dd sin near pi sees the residual of the double constant") {
    // sin(nearest_double(pi)) = pi - nearest_double(pi), far below double noise.
    const DD near_pi(3.141592653589793116, 0.0);
    const double s = to_double(dd_sin(near_pi));
    CHECK(s == doctest::Approx(1.2246467991473532e-16).epsilon(1e-10));
}

TEST_CASE("scalar bridge dispatches") {
    CHECK(sc_sin(1.0) == doctest::Approx(std::sin(1.0)));
    CHECK(to_double(sc_cos(DD(1.0))) == doctest::Approx(std::cos(1.0)));
    CHECK(to_double(ScalarConst<DD>::two_pi()) == doctest::Approx(2.0 * M_PI));
}

#pragma once

#include <cmath>
#include <numbers>

#include "torcan/errors.hpp"

namespace torcan::geom {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Canonical angle range is [-pi, pi); ties at exactly +pi map to -pi.
inline double wrap_angle(double t) {
    if (!std::isfinite(t)) {
        throw DomainError("wrap_angle: non-finite input");
    }
    double r = std::remainder(t, kTwoPi); // (-pi, pi]
    if (r == kPi) {
        r = -kPi;
    }
    return r;
}

// Point on T^2; x is the fast (vertical) coordinate, y the slow one.
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    static TorusPoint wrapped(double x, double y) { return {wrap_angle(x), wrap_angle(y)}; }
};

// Arc from a to b in circle orientation; `reversed` flips traversal but
// keeps the point set.
struct OrientedArc {
    double a = 0.0;
    double b = 0.0;
    bool reversed = false;

    static OrientedArc forward(double a, double b) { return {wrap_angle(a), wrap_angle(b), false}; }
    static OrientedArc backward(double a, double b) { return {wrap_angle(a), wrap_angle(b), true}; }

    // Length of the traversal from a to b along orientation, in [0, 2*pi).
    double length() const {
        double d = b - a;
        d -= kTwoPi * std::floor(d / kTwoPi);
        return d;
    }
};

inline bool arc_contains(const OrientedArc& arc, double t) {
    const double len = arc.length();
    double d = wrap_angle(t) - arc.a;
    d -= kTwoPi * std::floor(d / kTwoPi); // [0, 2*pi)
    return d <= len || d >= kTwoPi - 1e-15;
}

// wrap(u - v); antisymmetric up to the |gap| = pi boundary case.
inline double circular_signed_gap(double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v)) {
        throw DomainError("circular_signed_gap: non-finite input");
    }
    return wrap_angle(u - v);
}

} // namespace torcan::geom

#pragma once

// Uniform scalar interface so the flow stack can be instantiated with
// plain double (standard tier) or DD (extended tier).

#include <cmath>

#include "torcan/dd.hpp"

namespace torcan {

inline double to_double(double a) { return a; }

inline double sc_sin(double a) { return std::sin(a); }
inline double sc_cos(double a) { return std::cos(a); }
inline double sc_sqrt(double a) { return std::sqrt(a); }
inline double sc_abs(double a) { return std::fabs(a); }

inline DD sc_sin(DD a) { return dd_sin(a); }
inline DD sc_cos(DD a) { return dd_cos(a); }
inline DD sc_sqrt(DD a) { return dd_sqrt(a); }
inline DD sc_abs(DD a) { return dd_abs(a); }

template <class S> struct ScalarConst;

template <> struct ScalarConst<double> {
    static double pi() { return 3.141592653589793238462643383279502884; }
    static double two_pi() { return 2.0 * pi(); }
    static constexpr double eps = 2.220446049250313e-16;
};

template <> struct ScalarConst<DD> {
    static DD pi() { return dd_pi(); }
    static DD two_pi() { return dd_two_pi(); }
    static constexpr double eps = 4.93e-32;
};

// Wrap to approximately [-pi, pi) by exact multiple-of-2pi subtraction,
// preserving the full scalar precision of the residual.
template <class S>
S sc_wrap(S x) {
    const S two_pi = ScalarConst<S>::two_pi();
    const double k = std::nearbyint(to_double(x) / to_double(two_pi));
    S r = x - two_pi * k;
    if (to_double(r) >= to_double(ScalarConst<S>::pi())) r = r - two_pi;
    if (to_double(r) < -to_double(ScalarConst<S>::pi())) r = r + two_pi;
    return r;
}

} // namespace torcan

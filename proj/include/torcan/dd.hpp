#pragma once

// Compensated double-word ("double-double") scalar for the extended
// precision tier (~32 significant digits). Sum/product error-free
// transformations follow the usual Dekker/Knuth constructions; products
// rely on std::fma being correctly rounded.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace torcan {

struct DD {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi; }
};

namespace dd_detail {

inline DD quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double v = s - a;
    return {s, (a - (s - v)) + (b - v)};
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

} // namespace dd_detail

inline DD operator+(DD a, DD b) {
    using namespace dd_detail;
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
    using namespace dd_detail;
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DD operator/(DD a, DD b) {
    using namespace dd_detail;
    const double q1 = a.hi / b.hi;
    DD r = a - DD(q1) * b;
    const double q2 = r.hi / b.hi;
    r = r - DD(q2) * b;
    const double q3 = r.hi / b.hi;
    DD q = quick_two_sum(q1, q2);
    return q + DD(q3);
}

inline DD operator+(DD a, double b) { return a + DD(b); }
inline DD operator+(double a, DD b) { return DD(a) + b; }
inline DD operator-(DD a, double b) { return a - DD(b); }
inline DD operator-(double a, DD b) { return DD(a) - b; }
inline DD operator*(DD a, double b) { return a * DD(b); }
inline DD operator*(double a, DD b) { return DD(a) * b; }
inline DD operator/(DD a, double b) { return a / DD(b); }
inline DD operator/(double a, DD b) { return DD(a) / b; }

inline DD& operator+=(DD& a, DD b) { a = a + b; return a; }
inline DD& operator-=(DD& a, DD b) { a = a - b; return a; }
inline DD& operator*=(DD& a, DD b) { a = a * b; return a; }
inline DD& operator/=(DD& a, DD b) { a = a / b; return a; }

inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DD a, DD b) { return b < a; }
inline bool operator<=(DD a, DD b) { return !(b < a); }
inline bool operator>=(DD a, DD b) { return !(a < b); }
inline bool operator==(DD a, DD b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(DD a, DD b) { return !(a == b); }

inline double to_double(DD a) { return a.hi; }

inline DD dd_abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline DD dd_sqrt(DD a) {
    if (a.hi == 0.0) return DD(0.0);
    const double s = std::sqrt(a.hi);
    // One Newton step on x = (x + a/x)/2 doubles the working precision.
    DD x(s);
    x = (x + a / x) * DD(0.5);
    return x;
}

// pi to double-double precision; the low word is the classic
// pi - nearest_double(pi) residual.
inline constexpr DD dd_pi() { return {3.141592653589793116, 1.2246467991473531772e-16}; }
inline DD dd_two_pi() { return dd_pi() * 2.0; }
inline DD dd_half_pi() { return dd_pi() * 0.5; }

namespace dd_detail {

// Taylor coefficients 1/k! for k = 0..31, generated once.
inline const std::array<DD, 32>& inv_factorials() {
    static const std::array<DD, 32> table = [] {
        std::array<DD, 32> t{};
        t[0] = DD(1.0);
        for (int k = 1; k < 32; ++k) {
            t[k] = t[k - 1] / static_cast<double>(k);
        }
        return t;
    }();
    return table;
}

// sin on |r| <= pi/4: r * Horner sum of (-1)^m r^(2m) / (2m+1)!.
inline DD sin_taylor(DD r) {
    const auto& c = inv_factorials();
    const DD r2 = r * r;
    DD acc = ((29 - 1) / 2) % 2 == 0 ? c[29] : -c[29];
    for (int k = 27; k >= 1; k -= 2) {
        const bool plus = ((k - 1) / 2) % 2 == 0;
        acc = acc * r2 + (plus ? c[k] : -c[k]);
    }
    return r * acc;
}

// cos on |r| <= pi/4: Horner sum of (-1)^m r^(2m) / (2m)!.
inline DD cos_taylor(DD r) {
    const auto& c = inv_factorials();
    const DD r2 = r * r;
    DD acc = (30 / 2) % 2 == 0 ? c[30] : -c[30];
    for (int k = 28; k >= 0; k -= 2) {
        const bool plus = (k / 2) % 2 == 0;
        acc = acc * r2 + (plus ? c[k] : -c[k]);
    }
    return acc;
}

} // namespace dd_detail

// sin/cos with quadrant reduction; accurate for |a| up to a few hundred
// (reduction error grows like |k| * ulp(pi/2 low word), ~1e-32 here).
inline DD dd_sin(DD a) {
    const DD hp = dd_half_pi();
    const double kd = std::nearbyint(to_double(a) / to_double(hp));
    const DD r = a - hp * kd;
    switch (static_cast<std::int64_t>(kd) & 3) { // two's complement & gives mod 4 in [0,3]
        case 0: return dd_detail::sin_taylor(r);
        case 1: return dd_detail::cos_taylor(r);
        case 2: return -dd_detail::sin_taylor(r);
        default: return -dd_detail::cos_taylor(r);
    }
}

inline DD dd_cos(DD a) {
    const DD hp = dd_half_pi();
    const double kd = std::nearbyint(to_double(a) / to_double(hp));
    const DD r = a - hp * kd;
    switch (static_cast<std::int64_t>(kd) & 3) {
        case 0: return dd_detail::cos_taylor(r);
        case 1: return -dd_detail::sin_taylor(r);
        case 2: return -dd_detail::cos_taylor(r);
        default: return dd_detail::sin_taylor(r);
    }
}

} // namespace torcan

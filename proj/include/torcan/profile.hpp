#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "torcan/errors.hpp"
#include "torcan/scalar.hpp"
#include "torcan/slow_curve.hpp"

namespace torcan::family {

// C^2 quintic smoothstep on [0,1].
template <class S>
S smoothstep5(S t) {
    if (t <= S(0.0)) return S(0.0);
    if (t >= S(1.0)) return S(1.0);
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

template <class S>
S smoothstep5_prime(S t) {
    if (t <= S(0.0) || t >= S(1.0)) return S(0.0);
    const S u = t * (S(1.0) - t);
    return S(30.0) * u * u;
}

struct Plateau {
    double lo = 0.0;
    double hi = 0.0;
    double value = 0.0;    // signed plateau value of lambda
    double shoulder = 0.0; // transition width on each side (delta_0 / 2)

    double outer_lo() const { return lo - shoulder; }
    double outer_hi() const { return hi + shoulder; }
};

// Target fast-derivative profile lambda(y) = f'_x restricted to one branch
// of the slow curve, y in [-1, 1].
//
// Two shapes exist. A `constant` profile is just lambda == v on the whole
// strip (singular-layer fixtures). A `fold` profile is the built object:
// signed baseline with bump plateaus on an extended core [e_lo, e_hi],
// then a C^2 blend of the branch amplitude |lambda|/sqrt(1-a^2) toward a
// common ambient constant, which makes lambda vanish like sqrt(1 - a(y)^2)
// at the jump points while keeping the assembled field's amplitude bounded.
class LambdaProfile {
public:
    static LambdaProfile constant(double value) {
        LambdaProfile p;
        p.flat_ = true;
        p.flat_value_ = value;
        p.sign_ = value < 0.0 ? -1 : +1;
        p.baseline_ = std::fabs(value);
        return p;
    }

    // `e_lo`/`e_hi` delimit the extended core (plateaus plus shoulders must
    // stay inside); the amplitude blends to `ambient` over the half-gap
    // between the extended core and the jump points.
    static LambdaProfile fold(int sign, double baseline, const curve::SlowCurveModel& model,
                              double e_lo, double e_hi, double ambient) {
        if (sign != -1 && sign != 1) throw DomainError("LambdaProfile: sign must be +-1");
        if (!(baseline > 0.0) || !(ambient > 0.0)) {
            throw DomainError("LambdaProfile: baseline and ambient must be positive");
        }
        LambdaProfile p;
        p.flat_ = false;
        p.sign_ = sign;
        p.baseline_ = baseline;
        p.curve_model_ = model;
        p.e_lo_ = e_lo;
        p.e_hi_ = e_hi;
        if (!(p.e_lo_ > -1.0 && p.e_hi_ < 1.0 && p.e_lo_ < p.e_hi_)) {
            throw DomainError("LambdaProfile: extended core must fit inside (-1, 1)");
        }
        p.h_hi_ = 0.5 * (1.0 - p.e_hi_);
        p.h_lo_ = 0.5 * (p.e_lo_ + 1.0);
        p.ambient_ = ambient;
        return p;
    }

    // Freeze boundaries: |lambda| / sqrt(1-a^2) is exactly `ambient`
    // outside [freeze_lo, freeze_hi].
    double freeze_lo() const { return e_lo_ - h_lo_; }
    double freeze_hi() const { return e_hi_ + h_hi_; }

    bool is_flat() const { return flat_; }
    int sign() const { return sign_; }
    double baseline() const { return baseline_; }
    double ambient() const { return ambient_; }
    double core_lo() const { return e_lo_; }
    double core_hi() const { return e_hi_; }
    const std::vector<Plateau>& plateaus() const { return plateaus_; }

    // lambda(y) on [-1, 1].
    template <class S>
    S value(S y) const {
        if (flat_) return S(flat_value_);
        const double yd = to_double(y);
        if (yd >= e_lo_ && yd <= e_hi_) {
            return S(static_cast<double>(sign_)) * raw_abs(y);
        }
        return S(static_cast<double>(sign_)) * amplitude(y) * branch_sine(y);
    }

    double value(double y) const { return value<double>(y); }

    // |lambda(y)| / sqrt(1 - a(y)^2): the branch amplitude the assembled
    // field multiplies in. Defined for every y (ambient outside the strip).
    template <class S>
    S amplitude(S y) const {
        if (flat_) {
            throw DomainError("LambdaProfile: constant profile has no bounded amplitude");
        }
        const double yd = to_double(y);
        if (yd >= e_lo_ && yd <= e_hi_) {
            return raw_abs(y) / branch_sine(y);
        }
        if (yd > e_hi_ && yd < e_hi_ + h_hi_) {
            const S t = (y - e_hi_) / h_hi_;
            const S sig = smoothstep5(t);
            return (S(1.0) - sig) * (S(baseline_) / branch_sine(y)) + sig * S(ambient_);
        }
        if (yd < e_lo_ && yd > e_lo_ - h_lo_) {
            const S t = (S(e_lo_) - y) / h_lo_;
            const S sig = smoothstep5(t);
            return (S(1.0) - sig) * (S(baseline_) / branch_sine(y)) + sig * S(ambient_);
        }
        return S(ambient_);
    }

    // d(amplitude)/dy, for the field's y-partials.
    template <class S>
    S amplitude_prime(S y) const {
        if (flat_) throw DomainError("LambdaProfile: constant profile has no amplitude");
        const double yd = to_double(y);
        const curve::SlowCurveModel& model = curve_model_;
        if (yd >= e_lo_ && yd <= e_hi_) {
            const S s = branch_sine(y);
            const S av = model.a<S>(y);
            const S ap = model.a_prime<S>(y);
            const S p = raw_abs(y);
            const S pp = raw_abs_prime(y);
            return pp / s + p * av * ap / (s * s * s);
        }
        auto blend_prime = [&](S t, double h, double tsign) -> S {
            const S s = branch_sine(y);
            const S av = model.a<S>(y);
            const S ap = model.a_prime<S>(y);
            const S sig = smoothstep5(t);
            const S sigp = smoothstep5_prime(t) * (tsign / h);
            return sigp * (S(ambient_) - S(baseline_) / s) +
                   (S(1.0) - sig) * S(baseline_) * av * ap / (s * s * s);
        };
        if (yd > e_hi_ && yd < e_hi_ + h_hi_) {
            return blend_prime((y - e_hi_) / h_hi_, h_hi_, +1.0);
        }
        if (yd < e_lo_ && yd > e_lo_ - h_lo_) {
            return blend_prime((S(e_lo_) - y) / h_lo_, h_lo_, -1.0);
        }
        return S(0.0);
    }

    // Integration / stepping breakpoints (plateau and blend edges).
    std::vector<double> breakpoints() const {
        std::vector<double> out;
        if (!flat_) {
            out.insert(out.end(), {e_lo_ - h_lo_, e_lo_, e_hi_, e_hi_ + h_hi_});
            for (const auto& p : plateaus_) {
                out.insert(out.end(), {p.outer_lo(), p.lo, p.hi, p.outer_hi()});
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void add_plateau(const Plateau& p);

    // The plateau covering y, if any (closed segment).
    std::optional<Plateau> plateau_at(double y) const {
        for (const auto& p : plateaus_) {
            if (y >= p.lo && y <= p.hi) return p;
        }
        return std::nullopt;
    }

private:
    template <class S>
    S branch_sine(S y) const {
        return curve_model_.branch_sine<S>(y);
    }

    // |P(y)| on the extended core: baseline magnitude with plateau bumps.
    template <class S>
    S raw_abs(S y) const {
        const double yd = to_double(y);
        for (const auto& p : plateaus_) {
            if (yd >= p.lo && yd <= p.hi) return S(std::fabs(p.value));
            if (yd > p.outer_lo() && yd < p.lo) {
                const S t = (y - p.outer_lo()) / p.shoulder;
                return S(baseline_) +
                       (S(std::fabs(p.value)) - S(baseline_)) * smoothstep5(t);
            }
            if (yd > p.hi && yd < p.outer_hi()) {
                const S t = (S(p.outer_hi()) - y) / p.shoulder;
                return S(baseline_) +
                       (S(std::fabs(p.value)) - S(baseline_)) * smoothstep5(t);
            }
        }
        return S(baseline_);
    }

    template <class S>
    S raw_abs_prime(S y) const {
        const double yd = to_double(y);
        for (const auto& p : plateaus_) {
            if (yd >= p.lo && yd <= p.hi) return S(0.0);
            if (yd > p.outer_lo() && yd < p.lo) {
                const S t = (y - p.outer_lo()) / p.shoulder;
                return (S(std::fabs(p.value)) - S(baseline_)) * smoothstep5_prime(t) /
                       p.shoulder;
            }
            if (yd > p.hi && yd < p.outer_hi()) {
                const S t = (S(p.outer_hi()) - y) / p.shoulder;
                return -(S(std::fabs(p.value)) - S(baseline_)) * smoothstep5_prime(t) /
                       p.shoulder;
            }
        }
        return S(0.0);
    }

    bool flat_ = true;
    double flat_value_ = 0.0;
    int sign_ = -1;
    double baseline_ = 2.0;
    curve::SlowCurveModel curve_model_{0.5};
    double e_lo_ = -0.85, e_hi_ = 0.85;
    double h_lo_ = 0.075, h_hi_ = 0.075;
    double ambient_ = 2.0;

    std::vector<Plateau> plateaus_;

    friend LambdaProfile bump(const LambdaProfile&, double, double, double, double, double);
};

// Prop.-style bump: install a plateau of magnitude (I + gamma) / |B - A|
// on [A, B] with quintic shoulders of width delta0/2 on each side, where
// delta0 = |B - A| * Delta / (I + gamma). The plateau integral exceeds I
// and the combined shoulder contribution stays below Delta.
LambdaProfile bump(const LambdaProfile& profile, double lo, double hi, double excess_I,
                   double gamma, double delta);

} // namespace torcan::family

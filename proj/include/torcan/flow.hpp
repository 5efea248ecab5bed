#pragma once

// Integration of the torus flow in graph form dx/dy = f(x, y) / eps with
// variational transport L = integral of f'_x / eps along the orbit and
// event detection on the sections x = 0 and x = pi.
//
// The integrator is an embedded Dormand-Prince 5(4) pair with cubic
// Hermite dense output, templated on the scalar so the same code runs in
// the standard (double) and extended (double-double) tiers. The state
// carries the unwrapped lift of x; a step is never allowed to advance x
// by more than one radian, which keeps event counting and double-word
// angle reduction exact.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "torcan/errors.hpp"
#include "torcan/scalar.hpp"
#include "torcan/torus_geom.hpp"

namespace torcan::flow {

enum class Tier { standard, extended };

struct FlowConfig {
    double eps = 0.1;
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 50'000'000;
    Tier tier = Tier::standard;
    double log_cap = 1e6; // saturation cap for |L|

    void validate() const {
        if (!(eps > 0.0)) throw DomainError("FlowConfig: eps must be positive");
        if (!(rtol > 0.0) || !(atol > 0.0)) {
            throw DomainError("FlowConfig: tolerances must be positive");
        }
        if (eps < 0.03 && tier != Tier::extended) {
            throw DomainError("FlowConfig: extended tier is mandatory for eps < 0.03");
        }
    }
};

struct CrossingEvent {
    double y = 0.0;
    double section = 0.0; // 0 or pi
    int direction = 0;    // sign of dx/dy at the crossing
};

struct OrbitSample {
    double y = 0.0;
    double x = 0.0; // unwrapped lift
    double L = 0.0;
};

struct AdvanceResult {
    double x_end = 0.0;       // wrapped to [-pi, pi)
    double x_lift_end = 0.0;  // unwrapped displacement end (lift, double image)
    double y_end = 0.0;
    double L = 0.0;
    bool saturated = false;
    bool halted = false; // an observer stopped the integration early
    long steps = 0;
    std::vector<CrossingEvent> events;
    std::vector<OrbitSample> samples;
};

struct AdvanceOptions {
    bool collect_events = false;
    bool record_samples = false;
};

// CSV dump of recorded orbit samples (columns y, x, L).
std::string orbit_csv(const std::vector<OrbitSample>& samples);

// Observer protocol: called at every accepted node with (y, x_lift, L);
// returning true halts the integration at that node.
struct NullObserver {
    template <class S>
    bool operator()(const S&, const S&, double) const {
        return false;
    }
};

// Dense reference orbit: node data for Hermite interpolation of the lift
// x(y) and of L(y). Node order follows the traversal.
template <class S>
struct RefOrbit {
    std::vector<double> ykey;
    std::vector<S> y;
    std::vector<S> x;     // lift
    std::vector<S> dxdy;
    std::vector<double> L;
    std::vector<double> dLdy;
    bool increasing = true;

    std::size_t locate(double yq) const {
        std::size_t lo = 0, hi = ykey.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            const bool left = increasing ? (yq < ykey[mid]) : (yq > ykey[mid]);
            if (left) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return lo;
    }

    S x_at(S yq) const {
        const std::size_t i = locate(to_double(yq));
        const S h = y[i + 1] - y[i];
        const S t = (yq - y[i]) / h;
        const S t2 = t * t, t3 = t2 * t;
        const S h00 = S(2.0) * t3 - S(3.0) * t2 + S(1.0);
        const S h10 = t3 - S(2.0) * t2 + t;
        const S h01 = S(-2.0) * t3 + S(3.0) * t2;
        const S h11 = t3 - t2;
        return h00 * x[i] + h10 * h * dxdy[i] + h01 * x[i + 1] + h11 * h * dxdy[i + 1];
    }

    double L_at(double yq) const {
        const std::size_t i = locate(yq);
        const double h = to_double(y[i + 1]) - to_double(y[i]);
        const double t = (yq - to_double(y[i])) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * L[i] + (t3 - 2 * t2 + t) * h * dLdy[i] +
               (-2 * t3 + 3 * t2) * L[i + 1] + (t3 - t2) * h * dLdy[i + 1];
    }

    double y_start() const { return ykey.front(); }
    double y_end() const { return ykey.back(); }
    double L_total() const { return L.back(); }
    S x_end() const { return x.back(); }
};

// Wrap a lift value to approximately [-pi, pi); exact multiple-of-2pi
// subtraction so the residual keeps full scalar precision.
template <class S>
S wrap_lift(S x) {
    return sc_wrap(x);
}

namespace detail {

template <class Field, class S>
concept HasCombinedEval = requires(const Field& f, S x, S y) {
    { f.template f_and_fx<S>(x, y) } -> std::convertible_to<std::pair<S, S>>;
};

template <class S, class Field>
std::pair<S, S> eval_rhs(const Field& field, S x, S y) {
    if constexpr (HasCombinedEval<Field, S>) {
        return field.template f_and_fx<S>(x, y);
    } else {
        return {field.template f<S>(x, y), field.template fx<S>(x, y)};
    }
}

template <class S>
struct Dopri5Tableau {
    S c2, c3, c4, c5;
    S a21;
    S a31, a32;
    S a41, a42, a43;
    S a51, a52, a53, a54;
    S a61, a62, a63, a64, a65;
    S b1, b3, b4, b5, b6;
    S e1, e3, e4, e5, e6, e7;

    static const Dopri5Tableau& get() {
        static const Dopri5Tableau t = [] {
            Dopri5Tableau v;
            v.c2 = S(1.0) / S(5.0);
            v.c3 = S(3.0) / S(10.0);
            v.c4 = S(4.0) / S(5.0);
            v.c5 = S(8.0) / S(9.0);
            v.a21 = S(1.0) / S(5.0);
            v.a31 = S(3.0) / S(40.0);
            v.a32 = S(9.0) / S(40.0);
            v.a41 = S(44.0) / S(45.0);
            v.a42 = S(-56.0) / S(15.0);
            v.a43 = S(32.0) / S(9.0);
            v.a51 = S(19372.0) / S(6561.0);
            v.a52 = S(-25360.0) / S(2187.0);
            v.a53 = S(64448.0) / S(6561.0);
            v.a54 = S(-212.0) / S(729.0);
            v.a61 = S(9017.0) / S(3168.0);
            v.a62 = S(-355.0) / S(33.0);
            v.a63 = S(46732.0) / S(5247.0);
            v.a64 = S(49.0) / S(176.0);
            v.a65 = S(-5103.0) / S(18656.0);
            v.b1 = S(35.0) / S(384.0);
            v.b3 = S(500.0) / S(1113.0);
            v.b4 = S(125.0) / S(192.0);
            v.b5 = S(-2187.0) / S(6784.0);
            v.b6 = S(11.0) / S(84.0);
            v.e1 = S(71.0) / S(57600.0);
            v.e3 = S(-71.0) / S(16695.0);
            v.e4 = S(71.0) / S(1920.0);
            v.e5 = S(-17253.0) / S(339200.0);
            v.e6 = S(22.0) / S(525.0);
            v.e7 = S(-1.0) / S(40.0);
            return v;
        }();
        return t;
    }
};

// Hermite root of x(t) = target within one accepted step.
template <class S>
double locate_crossing(S ya, S xa, S fa, S yb, S xb, S fb, double target) {
    const double h = to_double(yb) - to_double(ya);
    const double x0 = to_double(xa), x1 = to_double(xb);
    const double d0 = to_double(fa) * h, d1 = to_double(fb) * h;
    auto value = [&](double t) {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + t) * d0 +
               (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * d1 - target;
    };
    double lo = 0.0, hi = 1.0;
    double flo = value(lo);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = value(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return to_double(ya) + 0.5 * (lo + hi) * h;
}

} // namespace detail

// Core integrator. Direction comes from y1 - y0; |y1 - y0| <= 4*pi.
// When `record` is non-null every accepted node lands in the polyline.
template <class S, class Field, class Obs = NullObserver>
AdvanceResult advance_impl(const Field& field, const FlowConfig& cfg, double x0, double y0,
                           double y1, const AdvanceOptions& opt = {},
                           RefOrbit<S>* record = nullptr, Obs&& observer = Obs{}) {
    cfg.validate();
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(y1)) {
        throw DomainError("advance: non-finite input");
    }
    const double span = y1 - y0;
    if (std::fabs(span) > 4.0 * geom::kPi + 1e-12) {
        throw DomainError("advance: |y1 - y0| must be <= 4*pi per call");
    }

    AdvanceResult out;
    if (span == 0.0) {
        out.x_end = geom::wrap_angle(x0);
        out.x_lift_end = x0;
        out.y_end = y0;
        return out;
    }
    const double dir = span > 0.0 ? 1.0 : -1.0;
    const auto& tb = detail::Dopri5Tableau<S>::get();
    const S eps(cfg.eps);

    S y(y0);
    S x(x0);
    double L = 0.0;
    bool saturated = false;

    auto rhs = [&](S yy, S xx) -> std::pair<S, S> {
        auto [fv, fxv] = detail::eval_rhs<S>(field, wrap_lift(xx), yy);
        if (!std::isfinite(to_double(fv)) || !std::isfinite(to_double(fxv))) {
            throw NumericalError("advance: non-finite field value at y=" +
                                 std::to_string(to_double(yy)));
        }
        return {fv / eps, fxv / eps};
    };

    auto [k1x, k1L] = rhs(y, x);

    if (record) {
        record->increasing = dir > 0.0;
        record->ykey.push_back(to_double(y));
        record->y.push_back(y);
        record->x.push_back(x);
        record->dxdy.push_back(k1x);
        record->L.push_back(L);
        record->dLdy.push_back(to_double(k1L));
    }

    double h = dir * std::min({std::fabs(span), cfg.eps, 0.01});
    const double h_floor = std::max(std::fabs(span) * 1e-15, 1e-300);

    for (long step = 0; step < cfg.max_steps; ++step) {
        if ((to_double(y) - y1) * dir >= 0.0) break;
        if (std::fabs(h) < h_floor) {
            throw NumericalError("advance: step size underflow near y=" +
                                 std::to_string(to_double(y)));
        }
        if ((to_double(y) + h - y1) * dir > 0.0) h = y1 - to_double(y);

        const S hs(h);
        const auto [k2x, k2L] = rhs(y + hs * tb.c2, x + hs * (tb.a21 * k1x));
        const auto [k3x, k3L] = rhs(y + hs * tb.c3, x + hs * (tb.a31 * k1x + tb.a32 * k2x));
        const auto [k4x, k4L] =
            rhs(y + hs * tb.c4, x + hs * (tb.a41 * k1x + tb.a42 * k2x + tb.a43 * k3x));
        const auto [k5x, k5L] = rhs(
            y + hs * tb.c5, x + hs * (tb.a51 * k1x + tb.a52 * k2x + tb.a53 * k3x + tb.a54 * k4x));
        const auto [k6x, k6L] =
            rhs(y + hs, x + hs * (tb.a61 * k1x + tb.a62 * k2x + tb.a63 * k3x + tb.a64 * k4x +
                                  tb.a65 * k5x));
        const S x_new =
            x + hs * (tb.b1 * k1x + tb.b3 * k3x + tb.b4 * k4x + tb.b5 * k5x + tb.b6 * k6x);
        const S L_new_s = S(L) + hs * (tb.b1 * k1L + tb.b3 * k3L + tb.b4 * k4L + tb.b5 * k5L +
                                       tb.b6 * k6L);
        const auto [k7x, k7L] = rhs(y + hs, x_new);

        const double err_x = std::fabs(to_double(
            hs * (tb.e1 * k1x + tb.e3 * k3x + tb.e4 * k4x + tb.e5 * k5x + tb.e6 * k6x +
                  tb.e7 * k7x)));
        const double err_L = std::fabs(to_double(
            hs * (tb.e1 * k1L + tb.e3 * k3L + tb.e4 * k4L + tb.e5 * k5L + tb.e6 * k6L +
                  tb.e7 * k7L)));
        const double scale_x = cfg.atol + cfg.rtol * std::max(1.0, std::fabs(to_double(x_new)));
        const double scale_L =
            1e3 * (cfg.atol + cfg.rtol * std::max(1.0, std::fabs(to_double(L_new_s))));
        const double err = std::max(err_x / scale_x, err_L / scale_L);
        const double dx_step = std::fabs(to_double(x_new) - to_double(x));

        if (dx_step > 1.0) { // keep winding countable and angle reduction tight
            h *= 0.5;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        // accepted
        const S y_new = y + hs;
        if (opt.collect_events) {
            const double xa = to_double(x), xb = to_double(x_new);
            const double lo = std::min(xa, xb), hi = std::max(xa, xb);
            const long k_lo = static_cast<long>(std::ceil(lo / geom::kPi - 1e-14));
            const long k_hi = static_cast<long>(std::floor(hi / geom::kPi + 1e-14));
            for (long k = k_lo; k <= k_hi; ++k) {
                const double target = static_cast<double>(k) * geom::kPi;
                if (target <= lo || target >= hi) continue;
                CrossingEvent ev;
                ev.y = detail::locate_crossing<S>(y, x, k1x, y_new, x_new, k7x, target);
                ev.section = (k % 2 == 0) ? 0.0 : geom::kPi;
                ev.direction = xb > xa ? +1 : -1;
                out.events.push_back(ev);
            }
        }

        x = x_new;
        y = y_new;
        L = to_double(L_new_s);
        if (std::fabs(L) > cfg.log_cap) {
            L = L > 0.0 ? cfg.log_cap : -cfg.log_cap;
            saturated = true;
        }
        k1x = k7x;
        k1L = k7L;
        ++out.steps;

        if (record) {
            record->ykey.push_back(to_double(y));
            record->y.push_back(y);
            record->x.push_back(x);
            record->dxdy.push_back(k1x);
            record->L.push_back(L);
            record->dLdy.push_back(to_double(k1L));
        }
        if (opt.record_samples) {
            out.samples.push_back({to_double(y), to_double(x), L});
        }
        if (observer(y, x, L)) {
            out.halted = true;
            break;
        }

        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        if (std::fabs(h) > std::fabs(span)) h = dir * std::fabs(span);
    }

    if (!out.halted && (to_double(y) - y1) * dir < 0.0) {
        throw NumericalError("advance: max step count exceeded near y=" +
                             std::to_string(to_double(y)));
    }

    out.x_end = to_double(wrap_lift(x));
    out.x_lift_end = to_double(x);
    out.y_end = to_double(y);
    out.L = L;
    out.saturated = saturated;
    return out;
}

// Forward advance (y1 > y0).
template <class Field>
AdvanceResult advance(const Field& field, const FlowConfig& cfg, double x0, double y0,
                      double y1, const AdvanceOptions& opt = {}) {
    if (!(y1 > y0)) throw DomainError("advance: requires y1 > y0 (use advance_backward)");
    if (cfg.tier == Tier::extended) return advance_impl<DD>(field, cfg, x0, y0, y1, opt);
    return advance_impl<double>(field, cfg, x0, y0, y1, opt);
}

// Backward advance (y1 < y0); L keeps the oriented-traversal convention.
template <class Field>
AdvanceResult advance_backward(const Field& field, const FlowConfig& cfg, double x0, double y0,
                               double y1, const AdvanceOptions& opt = {}) {
    if (!(y1 < y0)) throw DomainError("advance_backward: requires y1 < y0");
    if (cfg.tier == Tier::extended) return advance_impl<DD>(field, cfg, x0, y0, y1, opt);
    return advance_impl<double>(field, cfg, x0, y0, y1, opt);
}

// Transported section interval (center, log half-width); the half-width
// moves by the variational factor, which keeps exponentially thin
// intervals representable.
struct IntervalTrack {
    double section_y = 0.0;
    double center_x = 0.0;
    double log_halfwidth = 0.0;
    bool saturated = false;
};

template <class Field>
IntervalTrack transport_interval(const Field& field, const FlowConfig& cfg,
                                 const IntervalTrack& track, double y_target) {
    if (!(track.log_halfwidth < std::log(1e-2))) {
        throw DomainError("transport_interval: interval must be narrow (halfwidth < 1e-2)");
    }
    AdvanceResult res;
    if (y_target > track.section_y) {
        res = advance(field, cfg, track.center_x, track.section_y, y_target);
    } else if (y_target < track.section_y) {
        res = advance_backward(field, cfg, track.center_x, track.section_y, y_target);
    } else {
        IntervalTrack same = track;
        return same;
    }
    IntervalTrack out;
    out.section_y = y_target;
    out.center_x = res.x_end;
    out.log_halfwidth = track.log_halfwidth + res.L;
    if (out.log_halfwidth < -cfg.log_cap) {
        out.log_halfwidth = -cfg.log_cap;
        out.saturated = true;
    }
    out.saturated = out.saturated || res.saturated;
    return out;
}

} // namespace torcan::flow

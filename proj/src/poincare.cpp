#include "torcan/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace torcan::poincare {

std::string to_string(Undef u) {
    switch (u) {
        case Undef::none: return "none";
        case Undef::outside_domain: return "outside-domain";
        case Undef::wrong_side: return "wrong-side-release";
        case Undef::outside_strip: return "release-outside-strip";
        case Undef::gauge_unresolved: return "gauge-unresolved";
    }
    return "unknown";
}

namespace {

bool trace_enabled() {
    static const bool on = std::getenv("TORCAN_TRACE") != nullptr;
    return on;
}

// Signed-log scalar: value = sign * exp(lg). sign == 0 encodes zero.
struct SLog {
    int sign = 0;
    double lg = -1e300;

    static SLog zero() { return {}; }
    static SLog of(double v) {
        if (v == 0.0) return {};
        return {v > 0.0 ? +1 : -1, std::log(std::fabs(v))};
    }
};

SLog slog_add(const SLog& a, const SLog& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const double m = std::max(a.lg, b.lg);
    const double r = a.sign * std::exp(a.lg - m) + b.sign * std::exp(b.lg - m);
    if (r == 0.0) return SLog::zero();
    return {r > 0.0 ? +1 : -1, m + std::log(std::fabs(r))};
}

// Offset of an orbit from a reference at the cut, in signed-log form,
// together with the composite variational integral along the path.
struct Gauge {
    int sign = 0;
    double lg = -1e300;      // ln of the |offset| at the cut
    double L_path = 0.0;     // integral of f'_x / eps over the traversed range
    bool captured = false;
    double y_meas = 0.0;
};

template <class S>
struct CaptureObserver {
    const flow::RefOrbit<S>* ref;
    double theta;
    double y_skip; // ignore the transient before this y (traversal order)
    bool forward;
    mutable bool triggered = false;
    mutable S delta{};
    mutable double y_at = 0.0;

    bool operator()(const S& y, const S& x, double) const {
        const double yd = to_double(y);
        if (forward ? (yd < y_skip) : (yd > y_skip)) return false;
        // only compare inside the reference's covered range
        const double r0 = ref->ykey.front(), r1 = ref->ykey.back();
        if (yd < std::min(r0, r1) + 1e-3 || yd > std::max(r0, r1) - 1e-3) return false;
        const S d = flow::wrap_lift(x - ref->x_at(y));
        const double dd_ = std::fabs(to_double(d));
        if (trace_enabled() && dd_ < 1e-3) {
            std::fprintf(stderr, "[obs] y=%.5f delta=%.6e\n", yd, to_double(d));
        }
        if (dd_ <= theta && dd_ > 0.0) {
            triggered = true;
            delta = d;
            y_at = yd;
            return true;
        }
        return false;
    }
};

} // namespace

struct SectionEngine::Impl {
    family::Family fam;
    flow::FlowConfig cfg;
    EngineOptions opts;
    singular::ReleaseMap rmap;
    bool ext = false;
    double theta = 1e-6;
    double gap_floor = 1e-12;

    flow::RefOrbit<double> wm_d, wp_d;
    flow::RefOrbit<DD> wm_x, wp_x;
    CutData cut;

    Impl(const family::Family& f, const flow::FlowConfig& c, const EngineOptions& o)
        : fam(f), cfg(c), opts(o),
          rmap(f.lambda_minus, f.lambda_plus, f.sections) {
        cfg.validate();
        ext = cfg.tier == flow::Tier::extended;
        if (ext) {
            cfg.rtol = std::min(cfg.rtol, 1e-20);
            cfg.atol = std::min(cfg.atol, 1e-24);
        }
        // The gap floor sits above the canonical-orbit integration noise;
        // a computed |gap| below it is indistinguishable from an exact
        // window hit (the true in-window gap is exponentially smaller than
        // every release offset in play).
        theta = opts.theta_switch > 0.0 ? opts.theta_switch : (ext ? 1e-10 : 1e-6);
        gap_floor = opts.gap_floor > 0.0 ? opts.gap_floor : (ext ? 1e-15 : 1e-7);
        if (ext) {
            build<DD>(wm_x, wp_x);
        } else {
            build<double>(wm_d, wp_d);
        }
    }

    template <class S>
    const flow::RefOrbit<S>& wminus() const;
    template <class S>
    const flow::RefOrbit<S>& wplus() const;

    template <class S>
    void build(flow::RefOrbit<S>& wm, flow::RefOrbit<S>& wp) {
        const auto& sec = fam.sections;
        const double am = sec.alpha_minus();
        const double ap = sec.alpha_plus();
        const double xm = fam.model.branch(curve::BranchSign::attracting, am);
        const double xp = fam.model.branch(curve::BranchSign::repelling, ap);

        flow::advance_impl<S>(fam.field, cfg, xm, am, geom::kPi, {}, &wm);
        flow::advance_impl<S>(fam.field, cfg, xp, ap, -geom::kPi, {}, &wp);

        cut.gap = to_double(flow::wrap_lift(wm.x_end() - wp.x_end()));
        cut.d_minus = {geom::kPi, to_double(flow::wrap_lift(wm.x_end())),
                       std::log(opts.j_halfwidth) + wm.L_total(), false};
        cut.d_plus = {-geom::kPi, to_double(flow::wrap_lift(wp.x_end())),
                      std::log(opts.j_halfwidth) + wp.L_total(), false};
        if (cut.d_minus.log_halfwidth < -cfg.log_cap) {
            cut.d_minus.log_halfwidth = -cfg.log_cap;
            cut.d_minus.saturated = true;
        }
        if (cut.d_plus.log_halfwidth < -cfg.log_cap) {
            cut.d_plus.log_halfwidth = -cfg.log_cap;
            cut.d_plus.saturated = true;
        }
    }

    // Forward probe from (x_src, y0) to the cut, measured against W^-.
    template <class S>
    Gauge probe_forward(double x_src, double y0) const {
        const auto& ref = wminus<S>();
        CaptureObserver<S> obs{&ref, theta, y0 + 1e-9, true};
        const auto res =
            flow::advance_impl<S>(fam.field, cfg, x_src, y0, geom::kPi, {}, nullptr, obs);
        Gauge g;
        if (obs.triggered) {
            g.captured = true;
            g.y_meas = obs.y_at;
            const double d = to_double(obs.delta);
            g.sign = d > 0.0 ? +1 : -1;
            g.lg = std::log(std::fabs(d)) + (ref.L_total() - ref.L_at(obs.y_at));
            g.L_path = res.L + (ref.L_total() - ref.L_at(obs.y_at));
        } else {
            // never within theta of the reference: subtract directly at the cut
            const S d = flow::wrap_lift(S(res.x_lift_end) - ref.x_end());
            const double dd_ = to_double(d);
            if (dd_ == 0.0) {
                g.sign = 0;
                g.lg = -1e300;
            } else {
                g.sign = dd_ > 0.0 ? +1 : -1;
                g.lg = std::log(std::fabs(dd_));
            }
            g.L_path = res.L;
            g.y_meas = geom::kPi;
        }
        if (trace_enabled()) {
            std::fprintf(stderr,
                         "[fwd probe] x=%.3f y0=%.4f captured=%d y_meas=%.5f delta=%.3e "
                         "lg=%.3f Lpath=%.3f refLtot=%.3f\n",
                         x_src, y0, obs.triggered, g.y_meas,
                         obs.triggered ? to_double(obs.delta) : 0.0, g.lg, g.L_path,
                         ref.L_total());
        }
        return g;
    }

    // Backward probe from (x_tgt, y1) to the cut, measured against W^+.
    template <class S>
    Gauge probe_backward(double x_tgt, double y1) const {
        const auto& ref = wplus<S>();
        CaptureObserver<S> obs{&ref, theta, y1 - 1e-9, false};
        const auto res =
            flow::advance_impl<S>(fam.field, cfg, x_tgt, y1, -geom::kPi, {}, nullptr, obs);
        Gauge g;
        if (obs.triggered) {
            g.captured = true;
            g.y_meas = obs.y_at;
            const double d = to_double(obs.delta);
            g.sign = d > 0.0 ? +1 : -1;
            g.lg = std::log(std::fabs(d)) + (ref.L_total() - ref.L_at(obs.y_at));
            g.L_path = res.L + (ref.L_total() - ref.L_at(obs.y_at));
        } else {
            const S d = flow::wrap_lift(S(res.x_lift_end) - ref.x_end());
            const double dd_ = to_double(d);
            if (dd_ == 0.0) {
                g.sign = 0;
                g.lg = -1e300;
            } else {
                g.sign = dd_ > 0.0 ? +1 : -1;
                g.lg = std::log(std::fabs(dd_));
            }
            g.L_path = res.L;
            g.y_meas = -geom::kPi;
        }
        if (trace_enabled()) {
            std::fprintf(stderr,
                         "[bwd probe] x=%.3f y1=%.4f captured=%d y_meas=%.5f lg=%.3f\n", x_tgt,
                         y1, g.captured, g.y_meas, g.lg);
        }
        return g;
    }

    template <class S>
    Gauge probe_backward_dir(bool minus_map, double y1) const {
        return probe_backward<S>(minus_map ? geom::kPi : 0.0, y1);
    }

    // Root solve for the release point: ln|Delta_b(y1)| = ln|G| over
    // I_delta. The backward offset log decreases strictly with slope
    // ~ -lambda^+(y1)/eps, so a slope-informed Newton inside a bisection
    // bracket converges in a handful of backward probes.
    struct ReleaseSolution {
        bool ok = false;
        Undef reason = Undef::outside_strip;
        double y1 = 0.0;
        double lg_residual = 0.0;
        Gauge gauge;
    };

    template <class S>
    ReleaseSolution solve_release(bool minus_map, const SLog& G) const {
        ReleaseSolution sol;
        const int want_sign = minus_map ? -1 : +1;
        if (G.sign != want_sign) {
            sol.reason = Undef::wrong_side;
            return sol;
        }
        const double lo = fam.sections.i_delta_lo(), hi = fam.sections.i_delta_hi();
        const Gauge g_lo = probe_backward_dir<S>(minus_map, lo);
        const Gauge g_hi = probe_backward_dir<S>(minus_map, hi);
        if (g_lo.sign != want_sign || g_hi.sign != want_sign) {
            sol.reason = Undef::wrong_side;
            return sol;
        }
        if (!(G.lg <= g_lo.lg && G.lg >= g_hi.lg)) {
            sol.reason = Undef::outside_strip;
            return sol;
        }

        double ylo = lo, yhi = hi;
        double y = 0.5 * (lo + hi);
        Gauge gb;
        double fy = 0.0;
        for (int it = 0; it < opts.release_max_iter; ++it) {
            gb = probe_backward_dir<S>(minus_map, y);
            fy = gb.lg - G.lg;
            sol.ok = true;
            if (trace_enabled()) {
                std::fprintf(stderr, "[solve] minus=%d target=%.3f y=%.6f lg=%.3f fy=%.3f\n",
                             minus_map, G.lg, y, gb.lg, fy);
            }
            if (std::fabs(fy) < 1e-11 * std::max(1.0, std::fabs(G.lg))) break;
            if (fy > 0.0) {
                ylo = y;
            } else {
                yhi = y;
            }
            const double slope = -fam.lambda_plus.value(y) / cfg.eps;
            double ynext = slope != 0.0 ? y - fy / slope : 0.5 * (ylo + yhi);
            if (!(ynext > ylo && ynext < yhi)) ynext = 0.5 * (ylo + yhi);
            if (std::fabs(ynext - y) < 1e-12) {
                y = ynext;
                gb = probe_backward_dir<S>(minus_map, y);
                fy = gb.lg - G.lg;
                break;
            }
            y = ynext;
        }
        sol.y1 = y;
        sol.lg_residual = fy;
        sol.gauge = gb;
        sol.reason = sol.ok ? Undef::none : Undef::outside_strip;
        return sol;
    }

    // Half map in the given direction. minus_map: Sigma^- -> Sigma^+.
    template <class S>
    Outcome half_map(bool minus_map, double y0) const {
        const auto& sec = fam.sections;
        Outcome out;
        if (!(y0 >= sec.i_delta_lo() - 1e-12 && y0 <= sec.i_delta_hi() + 1e-12)) {
            throw DomainError("half_map: y outside I_delta");
        }
        y0 = std::min(std::max(y0, sec.i_delta_lo()), sec.i_delta_hi());

        const double x_src = minus_map ? 0.0 : geom::kPi;
        const double x_tgt = minus_map ? geom::kPi : 0.0;

        const Gauge fg = probe_forward<S>(x_src, y0);
        SLog gap_term = std::fabs(cut.gap) <= gap_floor ? SLog::zero() : SLog::of(cut.gap);
        const SLog G = slog_add(gap_term, {fg.sign, fg.lg});
        if (G.sign == 0) {
            out.reason = Undef::gauge_unresolved;
            return out;
        }

        const ReleaseSolution sol = solve_release<S>(minus_map, G);
        if (!sol.ok) {
            out.reason = sol.reason;
            return out;
        }

        out.defined = true;
        out.map.y_out = sol.y1;
        out.map.log_offset = G.lg;
        out.map.residual = std::exp(G.lg) * std::fabs(std::expm1(sol.lg_residual));
        const double f_src = fam.field.f<double>(x_src, y0);
        const double f_tgt = fam.field.f<double>(x_tgt, sol.y1);
        const double mag = std::log(std::fabs(f_src)) - std::log(std::fabs(f_tgt)) +
                           fg.L_path - sol.gauge.L_path;
        const double sgn = (f_src > 0.0 ? 1.0 : -1.0) * (f_tgt > 0.0 ? 1.0 : -1.0);
        out.map.derivative = sgn * std::exp(mag);
        return out;
    }

    // ---- tube-aware circle map ----
    //
    // One y-period of the flow from the cut, with the climb along the
    // repelling branch handled in gauge form whenever the orbit enters the
    // exponentially thin tube around the backward canonical orbit (raw
    // integration cannot represent those offsets, and misplacing the
    // release point by the noise depth destroys the winding statistics).
    // The circle state is the orbit's signed-log offset from the forward
    // canonical cut point.

    static constexpr double tube_threshold = 1e-4;

    struct CircleStepData {
        SLog off_minus;     // arrival offset vs the W^- cut point
        double winding = 0.0;
        double L = 0.0;     // variational integral over the period
        bool tube = false;
        double release_y = 0.0;
        double release_section = 0.0;
        std::vector<flow::CrossingEvent> events;
    };

    SLog offset_of(double x) const {
        return SLog::of(geom::circular_signed_gap(x, cut.d_minus.center_x));
    }

    double x_of(const SLog& off) const {
        const double v = off.sign == 0 ? 0.0 : off.sign * std::exp(std::max(off.lg, -700.0));
        return geom::wrap_angle(cut.d_minus.center_x + v);
    }

    // Raw pass from the cut (free regime), with capture against W^-.
    template <class S>
    CircleStepData free_pass(double x_start, bool want_events) const {
        const auto& ref = wminus<S>();
        CaptureObserver<S> obs{&ref, theta, -geom::kPi + 1e-9, true};
        flow::AdvanceOptions opt;
        opt.collect_events = want_events;
        const auto res = flow::advance_impl<S>(fam.field, cfg, x_start, -geom::kPi, geom::kPi,
                                               opt, nullptr, obs);
        CircleStepData out;
        out.events = res.events;
        if (obs.triggered) {
            const double d = to_double(obs.delta);
            out.off_minus = {d > 0.0 ? +1 : -1,
                             std::log(std::fabs(d)) + (ref.L_total() - ref.L_at(obs.y_at))};
            const double ref_tail =
                to_double(ref.x_end()) - to_double(ref.x_at(S(obs.y_at)));
            out.winding = (res.x_lift_end - x_start) + ref_tail;
            out.L = res.L + (ref.L_total() - ref.L_at(obs.y_at));
        } else {
            out.off_minus = SLog::of(to_double(flow::wrap_lift(S(res.x_lift_end) - ref.x_end())));
            out.winding = res.x_lift_end - x_start;
            out.L = res.L;
        }
        return out;
    }

    // Tube pass: gauge release at y1, then a raw continuation to the cut.
    template <class S>
    CircleStepData tube_pass(const SLog& G, bool want_events) const {
        const bool minus_side = G.sign < 0; // releases across x = -pi; else across x = 0
        const ReleaseSolution sol = solve_release<S>(minus_side, G);
        if (!sol.ok) {
            throw DomainError("circle_step: tube release undefined");
        }
        const double y1 = sol.y1;
        const auto& wp = wplus<S>();
        const double section = minus_side ? -geom::kPi : 0.0;

        CircleStepData out;
        out.tube = true;
        out.release_y = y1;
        out.release_section = minus_side ? geom::kPi : 0.0;

        // Winding along the tube: the reference displacement to y1 plus the
        // wrapped swing from the branch to the crossed section.
        const double wp_lift_y1 = to_double(wp.x_at(S(y1)));
        const double wp_lift_cut = to_double(wp.x_end());
        const double swing = geom::wrap_angle(section - geom::wrap_angle(wp_lift_y1));
        out.winding = (wp_lift_y1 - wp_lift_cut) + swing;
        out.L = wp.L_at(y1) - wp.L_total();
        if (want_events) {
            out.events.push_back({y1, out.release_section, minus_side ? -1 : +1});
        }

        // Raw continuation from the crossing to the cut.
        const auto& ref = wminus<S>();
        CaptureObserver<S> obs{&ref, theta, y1 + 1e-9, true};
        flow::AdvanceOptions opt;
        opt.collect_events = want_events;
        const auto res = flow::advance_impl<S>(fam.field, cfg, section, y1, geom::kPi, opt,
                                               nullptr, obs);
        for (const auto& ev : res.events) out.events.push_back(ev);
        if (obs.triggered) {
            const double d = to_double(obs.delta);
            out.off_minus = {d > 0.0 ? +1 : -1,
                             std::log(std::fabs(d)) + (ref.L_total() - ref.L_at(obs.y_at))};
            const double ref_tail =
                to_double(ref.x_end()) - to_double(ref.x_at(S(obs.y_at)));
            out.winding += (res.x_lift_end - section) + ref_tail;
            out.L += res.L + (ref.L_total() - ref.L_at(obs.y_at));
        } else {
            out.off_minus = SLog::of(to_double(flow::wrap_lift(S(res.x_lift_end) - ref.x_end())));
            out.winding += res.x_lift_end - section;
            out.L += res.L;
        }
        return out;
    }

    template <class S>
    CircleStepData circle_step(const SLog& off, bool want_events) const {
        SLog gap_term = std::fabs(cut.gap) <= gap_floor ? SLog::zero() : SLog::of(cut.gap);
        const SLog G = slog_add(gap_term, off);
        if (trace_enabled()) {
            std::fprintf(stderr, "[circle] off=(%d,%.2f) G=(%d,%.2f) tube=%d\n", off.sign,
                         off.lg, G.sign, G.lg,
                         G.sign != 0 && G.lg < std::log(tube_threshold));
        }
        if (G.sign != 0 && G.lg < std::log(tube_threshold)) {
            // guard: gauge releases outside I_delta fall back to the raw pass
            try {
                return tube_pass<S>(G, want_events);
            } catch (const DomainError& e) {
                if (trace_enabled()) std::fprintf(stderr, "[circle] tube failed: %s\n", e.what());
            } catch (const NumericalError& e) {
                if (trace_enabled()) std::fprintf(stderr, "[circle] tube failed: %s\n", e.what());
            }
        }
        const double x_start =
            geom::wrap_angle(cut.d_plus.center_x +
                             (G.sign == 0 ? 0.0 : G.sign * std::exp(std::max(G.lg, -700.0))));
        return free_pass<S>(x_start, want_events);
    }

    template <class S>
    Outcome full_map_impl(double y) const {
        Outcome first = half_map<S>(true, y);
        if (!first.defined) return first;
        Outcome second;
        try {
            second = half_map<S>(false, first.map.y_out);
        } catch (const DomainError&) {
            Outcome und;
            und.reason = Undef::outside_strip;
            return und;
        }
        if (!second.defined) return second;
        Outcome out;
        out.defined = true;
        out.map.y_out = second.map.y_out;
        out.map.derivative = first.map.derivative * second.map.derivative;
        out.map.residual = std::max(first.map.residual, second.map.residual);
        out.map.log_offset = first.map.log_offset;
        return out;
    }

    Outcome full_map_dispatch(double y) const {
        return ext ? full_map_impl<DD>(y) : full_map_impl<double>(y);
    }
};

template <>
const flow::RefOrbit<double>& SectionEngine::Impl::wminus<double>() const {
    return wm_d;
}
template <>
const flow::RefOrbit<DD>& SectionEngine::Impl::wminus<DD>() const {
    return wm_x;
}
template <>
const flow::RefOrbit<double>& SectionEngine::Impl::wplus<double>() const {
    return wp_d;
}
template <>
const flow::RefOrbit<DD>& SectionEngine::Impl::wplus<DD>() const {
    return wp_x;
}

SectionEngine::SectionEngine(const family::Family& fam, const flow::FlowConfig& cfg,
                             const EngineOptions& opts)
    : impl_(std::make_unique<Impl>(fam, cfg, opts)) {}
SectionEngine::~SectionEngine() = default;
SectionEngine::SectionEngine(SectionEngine&&) noexcept = default;
SectionEngine& SectionEngine::operator=(SectionEngine&&) noexcept = default;

const CutData& SectionEngine::cut() const { return impl_->cut; }
double SectionEngine::eps() const { return impl_->cfg.eps; }

Outcome SectionEngine::half_map_minus(double y) const {
    return impl_->ext ? impl_->half_map<DD>(true, y) : impl_->half_map<double>(true, y);
}

Outcome SectionEngine::half_map_plus(double y) const {
    return impl_->ext ? impl_->half_map<DD>(false, y) : impl_->half_map<double>(false, y);
}

Outcome SectionEngine::full_map(double y) const { return impl_->full_map_dispatch(y); }

std::vector<CycleRecord> SectionEngine::find_cycles(const std::vector<family::Segment>& segments,
                                                    int grid) const {
    if (grid < 2) throw DomainError("find_cycles: grid must be >= 2");
    std::vector<CycleRecord> records;

    auto classify = [&](double y_star) {
        const Outcome oc = impl_->full_map_dispatch(y_star);
        if (!oc.defined) return;
        CycleRecord rec;
        rec.eps = impl_->cfg.eps;
        rec.y_fixed = y_star;
        rec.multiplier = oc.map.derivative;
        rec.canard = true; // fixed points of Q cross both Sigma sections by construction
        rec.passes = 2;
        rec.stability = std::fabs(rec.multiplier) < 1.0 ? singular::Stability::attracting
                                                        : singular::Stability::repelling;
        rec.near_parabolic = std::fabs(std::fabs(rec.multiplier) - 1.0) < 0.05;
        rec.segment_label = "unlabeled";
        for (const auto& seg : impl_->fam.ladder.cycle_segments()) {
            if (seg.contains(y_star)) {
                rec.segment_label = seg.label;
                break;
            }
        }
        for (const auto& r : records) {
            if (std::fabs(r.y_fixed - y_star) < 1e-8) return;
        }
        records.push_back(rec);
    };

    for (const auto& seg : segments) {
        std::vector<std::pair<double, double>> nodes; // (y, Q(y)-y), NaN when undefined
        for (int i = 0; i <= grid; ++i) {
            const double y = seg.lo + (seg.hi - seg.lo) * i / grid;
            const Outcome oc = impl_->full_map_dispatch(y);
            nodes.emplace_back(y, oc.defined ? oc.map.y_out - y
                                             : std::numeric_limits<double>::quiet_NaN());
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto [ya, ga] = nodes[i - 1];
            const auto [yb, gb] = nodes[i];
            if (std::isnan(ga) || std::isnan(gb)) continue;
            if (ga == 0.0) {
                classify(ya);
                continue;
            }
            if ((ga < 0.0) == (gb < 0.0)) continue;
            double lo = ya, hi = yb, glo = ga;
            bool failed = false;
            for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
                double mid = 0.5 * (lo + hi);
                Outcome oc = impl_->full_map_dispatch(mid);
                if (!oc.defined) {
                    mid = lo + 0.6 * (hi - lo);
                    oc = impl_->full_map_dispatch(mid);
                    if (!oc.defined) {
                        failed = true;
                        break;
                    }
                }
                const double gm = oc.map.y_out - mid;
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            if (!failed) classify(0.5 * (lo + hi));
        }
    }
    std::sort(records.begin(), records.end(),
              [](const CycleRecord& a, const CycleRecord& b) { return a.y_fixed < b.y_fixed; });
    return records;
}

CircleStep SectionEngine::circle_map(double x) const {
    const auto off = impl_->offset_of(geom::wrap_angle(x));
    const auto data = impl_->ext ? impl_->circle_step<DD>(off, true)
                                 : impl_->circle_step<double>(off, true);
    CircleStep step;
    step.x_image = impl_->x_of(data.off_minus);
    step.displacement = data.winding;
    step.events = data.events;
    return step;
}

double SectionEngine::rotation_number(double x0, int iterations) const {
    if (iterations < 10) throw DomainError("rotation_number: need at least 10 iterations");
    auto off = impl_->offset_of(geom::wrap_angle(x0));
    double total = 0.0;
    for (int i = 0; i < iterations; ++i) {
        const auto data = impl_->ext ? impl_->circle_step<DD>(off, false)
                                     : impl_->circle_step<double>(off, false);
        total += data.winding;
        off = data.off_minus;
    }
    // The family rotates toward negative x; report along the flow winding.
    return -total / (geom::kTwoPi * iterations);
}

std::vector<CycleRecord> SectionEngine::circle_section_cycles(int grid) const {
    if (grid < 8) throw DomainError("circle_section_cycles: grid must be >= 8");
    std::vector<CycleRecord> out;
    const double i_lo = impl_->fam.sections.i_delta_lo();
    const double i_hi = impl_->fam.sections.i_delta_hi();

    auto orbit_canard = [&](const std::vector<flow::CrossingEvent>& events) {
        for (const auto& ev : events) {
            if (ev.y >= i_lo && ev.y <= i_hi) return true;
        }
        return false;
    };

    auto multi_step = [&](double x, int passes, bool events) {
        struct Run {
            double disp = 0.0;
            double L = 0.0;
            std::vector<flow::CrossingEvent> events;
            double x_final = 0.0;
        } run;
        auto off = impl_->offset_of(x);
        for (int p = 0; p < passes; ++p) {
            const auto data = impl_->ext ? impl_->circle_step<DD>(off, events)
                                         : impl_->circle_step<double>(off, events);
            run.disp += data.winding;
            run.L += data.L;
            run.events.insert(run.events.end(), data.events.begin(), data.events.end());
            off = data.off_minus;
        }
        run.x_final = impl_->x_of(off);
        return run;
    };

    auto push_record = [&](double x_star, int passes) {
        const auto run = multi_step(geom::wrap_angle(x_star), passes, true);
        CycleRecord rec;
        rec.eps = impl_->cfg.eps;
        rec.y_fixed = geom::wrap_angle(x_star); // x-coordinate on Gamma for these records
        rec.multiplier = std::exp(std::min(run.L, 700.0));
        rec.canard = orbit_canard(run.events);
        rec.passes = passes;
        rec.stability = std::fabs(rec.multiplier) < 1.0 ? singular::Stability::attracting
                                                        : singular::Stability::repelling;
        rec.near_parabolic = std::fabs(std::fabs(rec.multiplier) - 1.0) < 0.05;
        for (const auto& r : out) {
            if (r.passes == passes && std::fabs(r.y_fixed - rec.y_fixed) < 1e-6) return;
        }
        out.push_back(rec);
    };

    // displacement tables for P and P^2
    std::vector<double> xs(grid), d1(grid), d2(grid);
    for (int i = 0; i < grid; ++i) {
        xs[i] = -geom::kPi + geom::kTwoPi * i / grid;
        d1[i] = multi_step(xs[i], 1, false).disp;
        d2[i] = multi_step(xs[i], 2, false).disp;
    }

    auto scan = [&](const std::vector<double>& disp, int passes) {
        for (int i = 0; i < grid; ++i) {
            const int j = (i + 1) % grid;
            const double gi = std::remainder(disp[i], geom::kTwoPi);
            const double gj = std::remainder(disp[j], geom::kTwoPi);
            if (std::fabs(gi - gj) > geom::kPi) continue; // wrapped jump, not a root
            if (gi == 0.0) {
                push_record(xs[i], passes);
                continue;
            }
            if ((gi < 0.0) == (gj < 0.0)) continue;
            double lo = xs[i], hi = xs[i] + geom::kTwoPi / grid, glo = gi;
            for (int it = 0; it < 50 && hi - lo > 1e-9; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = std::remainder(multi_step(mid, passes, false).disp,
                                                 geom::kTwoPi);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            push_record(0.5 * (lo + hi), passes);
        }
    };
    scan(d1, 1);
    scan(d2, 2);

    // Drop the P^2 duplicates of genuine P fixed points.
    std::vector<CycleRecord> cleaned;
    for (const auto& r : out) {
        if (r.passes == 2) {
            bool dup = false;
            for (const auto& q : out) {
                if (q.passes == 1 && std::fabs(q.y_fixed - r.y_fixed) < 1e-6) dup = true;
            }
            if (dup) continue;
        }
        cleaned.push_back(r);
    }
    return cleaned;
}

} // namespace torcan::poincare

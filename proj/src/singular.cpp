#include "torcan/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "torcan/quadrature.hpp"

namespace torcan::singular {

double phi(const family::LambdaProfile& lambda, double y1, double y2, double abs_tol) {
    if (!(y1 >= -1.0 && y2 <= 1.0)) {
        throw DomainError("phi: arc must lie inside [-1, 1]");
    }
    if (!(y1 <= y2)) throw DomainError("phi: y1 must be <= y2");
    if (y1 == y2) return 0.0;
    quad::Options opt;
    opt.abs_tol = abs_tol;
    return quad::integrate([&](double y) { return lambda.value(y); }, y1, y2,
                           lambda.breakpoints(), opt);
}

ReleaseMap::ReleaseMap(family::LambdaProfile lambda_minus, family::LambdaProfile lambda_plus,
                       curve::SectionSet sections, double residual_tol)
    : lm_(std::move(lambda_minus)), lp_(std::move(lambda_plus)), sections_(sections),
      tol_(residual_tol) {
    sections_.validate();
    // Cumulative Phi^+ at the profile breakpoints accelerates the root solve.
    cum_breaks_ = lp_.breakpoints();
    cum_breaks_.insert(cum_breaks_.begin(), -1.0);
    cum_breaks_.push_back(1.0);
    std::sort(cum_breaks_.begin(), cum_breaks_.end());
    cum_breaks_.erase(std::unique(cum_breaks_.begin(), cum_breaks_.end()), cum_breaks_.end());
    while (cum_breaks_.front() < -1.0) cum_breaks_.erase(cum_breaks_.begin());
    while (cum_breaks_.back() > 1.0) cum_breaks_.pop_back();

    cum_values_.resize(cum_breaks_.size(), 0.0);
    for (std::size_t i = 1; i < cum_breaks_.size(); ++i) {
        cum_values_[i] =
            cum_values_[i - 1] + phi(lp_, cum_breaks_[i - 1], cum_breaks_[i], 1e-13);
    }
    phi_plus_total_ = cum_values_.back();
    if (!(phi_plus_total_ > 0.0)) {
        throw DomainError("ReleaseMap: Phi^+ over the strip must be positive");
    }
}

double ReleaseMap::phi_minus_to_top(double y) const { return phi(lm_, y, 1.0); }

double ReleaseMap::phi_plus_cumulative(double b) const {
    if (b <= -1.0) return 0.0;
    if (b >= 1.0) return phi_plus_total_;
    const auto it = std::upper_bound(cum_breaks_.begin(), cum_breaks_.end(), b);
    const std::size_t k = static_cast<std::size_t>(it - cum_breaks_.begin()) - 1;
    return cum_values_[k] + phi(lp_, cum_breaks_[k], b, 1e-13);
}

bool ReleaseMap::beta_defined(double y) const {
    const double need = -phi_minus_to_top(y); // = |Phi^-(y,1)| for lambda^- < 0
    return need > 0.0 ? need < phi_plus_total_ : true;
}

double ReleaseMap::beta(double y) const {
    if (!(y >= -1.0 && y <= 1.0)) throw DomainError("beta: y outside [-1, 1]");
    const double target = -phi_minus_to_top(y); // Phi^+(-1, beta) must equal this
    if (!(target < phi_plus_total_)) {
        throw DomainError("beta: release undefined, contraction exceeds available expansion");
    }
    if (!(target > 0.0)) {
        // Phi^-(y,1) >= 0 can only happen at y == 1 (empty arc).
        if (target == 0.0) return -1.0;
        throw DomainError("beta: Phi^-(y,1) must be negative");
    }

    // Bracket between cumulative breakpoints, then bisect + secant polish.
    const auto it = std::lower_bound(cum_values_.begin(), cum_values_.end(), target);
    std::size_t hi_idx = static_cast<std::size_t>(it - cum_values_.begin());
    if (hi_idx == 0) hi_idx = 1;
    double lo = cum_breaks_[hi_idx - 1], hi = cum_breaks_[hi_idx];
    double flo = cum_values_[hi_idx - 1] - target, fhi = cum_values_[hi_idx] - target;
    for (int it2 = 0; it2 < 200 && hi - lo > 1e-15; ++it2) {
        double mid;
        // secant where it helps, bisection as the safeguard
        if (fhi != flo) {
            mid = lo - flo * (hi - lo) / (fhi - flo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        if (it2 % 3 == 2) mid = 0.5 * (lo + hi);
        const double fm = phi_plus_cumulative(mid) - target;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    const double b = 0.5 * (lo + hi);
    const double res = residual(y, b);
    if (!(std::fabs(res) <= tol_)) {
        throw NumericalError("beta: residual " + std::to_string(res) + " exceeds tolerance");
    }
    return b;
}

double ReleaseMap::residual(double y, double beta_y) const {
    return phi_minus_to_top(y) + phi_plus_cumulative(beta_y);
}

double ReleaseMap::beta_derivative(double y) const {
    const double b = beta(y);
    const double lp_at = lp_.value(b);
    if (lp_at == 0.0) {
        throw DomainError("beta_derivative: lambda^+(beta(y)) vanishes");
    }
    return lm_.value(y) / lp_at;
}

std::vector<BetaTabRow> ReleaseMap::tabulate(int points) const {
    if (points < 2) throw DomainError("tabulate: need at least two points");
    std::vector<BetaTabRow> rows;
    rows.reserve(static_cast<std::size_t>(points));
    const double lo = sections_.i_delta_lo(), hi = sections_.i_delta_hi();
    for (int i = 0; i < points; ++i) {
        const double y = lo + (hi - lo) * i / (points - 1);
        if (!beta_defined(y)) continue;
        BetaTabRow r;
        r.y = y;
        r.beta = beta(y);
        r.beta_prime = beta_derivative(y);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct EndpointPair {
    double lo, hi;
};

} // namespace

InclusionReport check_inclusions(const ReleaseMap& map, const family::SegmentLadder& ladder) {
    InclusionReport rep;
    const int n = ladder.n();

    auto beta_at = [&](double y, const std::string& where) {
        if (!map.beta_defined(y)) {
            throw DomainError("check_inclusions: beta undefined at " + where + " (y=" +
                              std::to_string(y) + ")");
        }
        return map.beta(y);
    };

    for (int i = 1; i <= n + 1; ++i) {
        const bool odd = (i % 2) == 1;
        const family::Segment sa = ladder.seg_a(i);
        const family::Segment sb = ladder.seg_b(i);
        const EndpointPair arc_a{ladder.a(2 * i - 2), ladder.a(2 * i + 1)};
        const EndpointPair arc_b{ladder.b(2 * i + 1), ladder.b(2 * i - 2)};

        if (odd) {
            // beta([a_{2i-2}, a_{2i+1}]) strictly inside omega^b_i
            {
                InclusionRow row;
                row.label = "beta([a_" + std::to_string(2 * i - 2) + ",a_" +
                            std::to_string(2 * i + 1) + "]) in " + sb.label;
                const double im_hi = beta_at(arc_a.lo, row.label);
                const double im_lo = beta_at(arc_a.hi, row.label);
                row.margin_lo = im_lo - sb.lo;
                row.margin_hi = sb.hi - im_hi;
                rep.rows.push_back(row);
            }
            if (i <= n) {
                InclusionRow row;
                row.label = "beta([b_" + std::to_string(2 * i + 1) + ",b_" +
                            std::to_string(2 * i - 2) + "]) in " + sa.label;
                const double im_hi = beta_at(arc_b.lo, row.label);
                const double im_lo = beta_at(arc_b.hi, row.label);
                row.margin_lo = im_lo - sa.lo;
                row.margin_hi = sa.hi - im_hi;
                rep.rows.push_back(row);
            }
        } else {
            // [a_{2i-2}, a_{2i+1}] strictly inside beta(omega^b_i)
            {
                InclusionRow row;
                row.label = "[a_" + std::to_string(2 * i - 2) + ",a_" +
                            std::to_string(2 * i + 1) + "] in beta(" + sb.label + ")";
                const double im_hi = beta_at(sb.lo, row.label);
                const double im_lo = beta_at(sb.hi, row.label);
                row.margin_lo = arc_a.lo - im_lo;
                row.margin_hi = im_hi - arc_a.hi;
                rep.rows.push_back(row);
            }
            if (i <= n) {
                InclusionRow row;
                row.label = "[b_" + std::to_string(2 * i + 1) + ",b_" +
                            std::to_string(2 * i - 2) + "] in beta(" + sa.label + ")";
                const double im_hi = beta_at(sa.lo, row.label);
                const double im_lo = beta_at(sa.hi, row.label);
                row.margin_lo = arc_b.lo - im_lo;
                row.margin_hi = im_hi - arc_b.hi;
                rep.rows.push_back(row);
            }
        }
    }
    return rep;
}

namespace {

// Bisection refinement of a sign change of g(y) = beta(beta(y)) - y.
double refine_fixed_point(const ReleaseMap& map, double lo, double hi, double glo) {
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = map.beta(map.beta(mid)) - mid;
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

BetaBetaScan beta_beta_fixed_points(const ReleaseMap& map, double lo, double hi, int grid) {
    if (grid < 2) throw DomainError("beta_beta_fixed_points: grid must be >= 2");
    if (!(lo < hi)) throw DomainError("beta_beta_fixed_points: empty search interval");

    BetaBetaScan scan;
    const double ilo = map.sections().i_delta_lo();
    const double ihi = map.sections().i_delta_hi();

    std::vector<std::pair<double, double>> nodes; // (y, g(y)) where defined
    bool all_identity = true;
    bool any_defined = false;
    double span_start = lo;
    bool in_undefined = false;

    for (int i = 0; i <= grid; ++i) {
        const double y = lo + (hi - lo) * i / grid;
        bool ok = y >= ilo && y <= ihi && map.beta_defined(y);
        double g = 0.0;
        if (ok) {
            const double by = map.beta(y);
            if (map.beta_defined(by)) {
                g = map.beta(by) - y;
            } else {
                ok = false;
            }
        }
        if (ok) {
            any_defined = true;
            if (std::fabs(g) >= 1e-9) all_identity = false;
            nodes.emplace_back(y, g);
            if (in_undefined) {
                scan.undefined_spans.emplace_back(span_start, y);
                in_undefined = false;
            }
        } else {
            nodes.emplace_back(y, std::numeric_limits<double>::quiet_NaN());
            if (!in_undefined) {
                span_start = y;
                in_undefined = true;
            }
        }
    }
    if (in_undefined) scan.undefined_spans.emplace_back(span_start, hi);

    if (any_defined && all_identity) {
        scan.degenerate_identity = true; // non-hyperbolic continuum, no isolated roots
        return scan;
    }

    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const auto [y0, g0] = nodes[i - 1];
        const auto [y1, g1] = nodes[i];
        if (std::isnan(g0) || std::isnan(g1)) continue;
        if (g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
            const double y = g0 == 0.0 ? y0 : refine_fixed_point(map, y0, y1, g0);
            const double by = map.beta(y);
            BetaBetaFixedPoint fp;
            fp.y = y;
            fp.multiplier = map.beta_derivative(by) * map.beta_derivative(y);
            scan.fixed_points.push_back(fp);
        }
    }
    return scan;
}

PredictionReport predict(const ReleaseMap& map, const family::SegmentLadder& ladder) {
    PredictionReport rep;
    rep.inclusions = check_inclusions(map, ladder);
    if (!rep.inclusions.pass()) {
        throw ConstructionError("predict: beta inclusions fail, prediction refused");
    }
    const int n = ladder.n();
    rep.cycle_count = 2 * n + 1;

    auto make_entry = [&](const family::Segment& seg, int i) {
        PredictedCycle c;
        c.segment_label = seg.label;
        c.seg_lo = seg.lo;
        c.seg_hi = seg.hi;
        c.ladder_index = i;
        c.stability = (i % 2 == 1) ? Stability::attracting : Stability::repelling;
        const auto scan = beta_beta_fixed_points(map, seg.lo, seg.hi, 400);
        if (scan.fixed_points.size() != 1) {
            throw NumericalError("predict: expected one beta*beta fixed point in " + seg.label +
                                 ", found " + std::to_string(scan.fixed_points.size()));
        }
        c.fixed_point = scan.fixed_points.front().y;
        c.multiplier_constant = scan.fixed_points.front().multiplier;
        const bool attracting = std::fabs(c.multiplier_constant) < 1.0;
        if (attracting != (c.stability == Stability::attracting)) {
            throw NumericalError("predict: multiplier parity mismatch in " + seg.label);
        }
        rep.cycles.push_back(c);
    };

    for (int i = 1; i <= n; ++i) {
        make_entry(ladder.seg_a(i), i);
        make_entry(ladder.seg_b(i), i);
    }
    make_entry(ladder.seg_a(n + 1), n + 1);
    return rep;
}

} // namespace torcan::singular

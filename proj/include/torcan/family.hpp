#pragma once

#include <string>
#include <utility>
#include <vector>

#include "torcan/errors.hpp"
#include "torcan/ladder.hpp"
#include "torcan/profile.hpp"
#include "torcan/scalar.hpp"
#include "torcan/slow_curve.hpp"

namespace torcan::family {

// Assembled periodic vector field f(x, y) = Lambda(x, y) * (cos x - a(y)).
//
// Lambda = ambient + phi_m(x) * (Am(y) - ambient) + phi_p(x) * (Ap(y) - ambient),
// where Am/Ap are the branch amplitudes of the two lambda profiles and
// phi_m/phi_p are C^2 partitions of the x-circle equal to 1 on the x-range
// the respective branch occupies while the amplitudes differ from ambient.
// On both branches f'_x therefore restricts exactly to the profiles
// (plateaus on the core, sqrt(1-a^2) decay at the folds), and near the
// jump points the field degenerates to ambient * (cos x - a(y)).
class FastField {
public:
    FastField() = default;
    FastField(curve::SlowCurveModel model, LambdaProfile lminus, LambdaProfile lplus,
              double ambient, double ramp_lo, double plateau_lo, double plateau_hi,
              double ramp_hi)
        : model_(model), lm_(std::move(lminus)), lp_(std::move(lplus)), ambient_(ambient),
          x0_(ramp_lo), x1_(plateau_lo), x2_(plateau_hi), x3_(ramp_hi) {}

    const curve::SlowCurveModel& model() const { return model_; }
    const LambdaProfile& lambda_minus() const { return lm_; }
    const LambdaProfile& lambda_plus() const { return lp_; }
    double ambient() const { return ambient_; }

    template <class S>
    S f(S x, S y) const {
        x = sc_wrap(x);
        y = sc_wrap(y);
        return lambda_w(x, y) * (sc_cos(x) - model_.a<S>(y));
    }

    template <class S>
    S fx(S x, S y) const {
        x = sc_wrap(x);
        y = sc_wrap(y);
        return lambda_x(x, y) * (sc_cos(x) - model_.a<S>(y)) - lambda_w(x, y) * sc_sin(x);
    }

    // f and f'_x with the partition blend evaluated once (integrator hot path).
    template <class S>
    std::pair<S, S> f_and_fx(S x, S y) const {
        x = sc_wrap(x);
        y = sc_wrap(y);
        const S am = lm_.amplitude<S>(y) - S(ambient_);
        const S ap = lp_.amplitude<S>(y) - S(ambient_);
        const S lam = S(ambient_) + part_m<S>(x) * am + part_m<S>(-x) * ap;
        const S lam_x = part_m_prime<S>(x) * am - part_m_prime<S>(-x) * ap;
        const S height = sc_cos(x) - model_.a<S>(y);
        return {lam * height, lam_x * height - lam * sc_sin(x)};
    }

    template <class S>
    S fxx(S x, S y) const {
        x = sc_wrap(x);
        y = sc_wrap(y);
        return lambda_xx(x, y) * (sc_cos(x) - model_.a<S>(y)) -
               S(2.0) * lambda_x(x, y) * sc_sin(x) - lambda_w(x, y) * sc_cos(x);
    }

    template <class S>
    S fy(S x, S y) const {
        x = sc_wrap(x);
        y = sc_wrap(y);
        const S lam_y = part_m<S>(x) * lm_.amplitude_prime<S>(y) +
                        part_m<S>(-x) * lp_.amplitude_prime<S>(y);
        return lam_y * (sc_cos(x) - model_.a<S>(y)) - lambda_w(x, y) * model_.a_prime<S>(y);
    }

    template <class S>
    S lambda(S x, S y) const {
        return lambda_w(sc_wrap(x), sc_wrap(y));
    }

private:
    template <class S>
    S lambda_w(S x, S y) const {
        return S(ambient_) + part_m<S>(x) * (lm_.amplitude<S>(y) - S(ambient_)) +
               part_m<S>(-x) * (lp_.amplitude<S>(y) - S(ambient_));
    }

    template <class S>
    S lambda_x(S x, S y) const {
        return part_m_prime<S>(x) * (lm_.amplitude<S>(y) - S(ambient_)) -
               part_m_prime<S>(-x) * (lp_.amplitude<S>(y) - S(ambient_));
    }

    template <class S>
    S lambda_xx(S x, S y) const {
        return part_m_second<S>(x) * (lm_.amplitude<S>(y) - S(ambient_)) +
               part_m_second<S>(-x) * (lp_.amplitude<S>(y) - S(ambient_));
    }

    // Partition for the attracting branch side (x > 0); the repelling side
    // uses part_m(-x). Zero outside (x0, x3), one on [x1, x2].
    template <class S>
    S part_m(S x) const {
        const double xd = to_double(x);
        if (xd <= x0_ || xd >= x3_) return S(0.0);
        if (xd >= x1_ && xd <= x2_) return S(1.0);
        if (xd < x1_) return smoothstep5((x - x0_) / (x1_ - x0_));
        return S(1.0) - smoothstep5((x - x2_) / (x3_ - x2_));
    }

    template <class S>
    S part_m_prime(S x) const {
        const double xd = to_double(x);
        if (xd <= x0_ || xd >= x3_ || (xd >= x1_ && xd <= x2_)) return S(0.0);
        if (xd < x1_) return smoothstep5_prime((x - x0_) / (x1_ - x0_)) / (x1_ - x0_);
        return -smoothstep5_prime((x - x2_) / (x3_ - x2_)) / (x3_ - x2_);
    }

    template <class S>
    S part_m_second(S x) const {
        const double xd = to_double(x);
        if (xd <= x0_ || xd >= x3_ || (xd >= x1_ && xd <= x2_)) return S(0.0);
        auto second = [](S t) {
            const S u = t * (S(1.0) - t);
            return S(60.0) * u * (S(1.0) - S(2.0) * t);
        };
        if (xd < x1_) {
            const double w = x1_ - x0_;
            return second((x - x0_) / w) / (w * w);
        }
        const double w = x3_ - x2_;
        return -second((x - x2_) / w) / (w * w);
    }

    curve::SlowCurveModel model_{0.5};
    LambdaProfile lm_ = LambdaProfile::constant(-2.0);
    LambdaProfile lp_ = LambdaProfile::constant(2.0);
    double ambient_ = 2.0;
    double x0_ = 0.1, x1_ = 0.2, x2_ = 0.8, x3_ = 1.0;
};

struct InequalityRow {
    std::string label;   // e.g. "attracting.first[i=1]"
    bool skipped = false;
    double lhs = 0.0;    // |Phi| on the small side
    double rhs = 0.0;    // |Phi| on the large side
    double margin = 0.0; // rhs - lhs
};

struct InequalityReport {
    std::vector<InequalityRow> rows;

    bool pass() const {
        for (const auto& r : rows) {
            if (!r.skipped && !(r.margin > 0.0)) return false;
        }
        return true;
    }
    double min_margin() const {
        double m = 1e300;
        for (const auto& r : rows) {
            if (!r.skipped && r.margin < m) m = r.margin;
        }
        return m;
    }
};

struct BuildOptions {
    double baseline = 2.0;
    double gamma = 1.0;     // slack multiplier on the paper's "+1" excess
    double ambient = 2.0;   // common amplitude at and beyond the folds
    double core_margin = 0.02;
    double delta_cap = 0.05;
};

struct BuiltProfiles {
    LambdaProfile lambda_minus;
    LambdaProfile lambda_plus;
    InequalityReport report;
};

// Two-phase induction: phase 1 installs bumps for the last inequalities
// (i = 1..n+1), phase 2 for the first inequalities (i = n..0); every step
// re-verifies all previously satisfied rows and shrinks its Delta when a
// margin would be lost.
BuiltProfiles build_profiles(const curve::SlowCurveModel& model, const SegmentLadder& ladder,
                             const BuildOptions& opts = {});

InequalityReport check_inequalities(const LambdaProfile& lambda_minus,
                                    const LambdaProfile& lambda_plus,
                                    const SegmentLadder& ladder);

FastField assemble_field(const curve::SlowCurveModel& model, const LambdaProfile& lambda_minus,
                         const LambdaProfile& lambda_plus);

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> failures;
    double min_abs_fx = 0.0;   // over sampled branch points away from folds
    double min_abs_fxx = 0.0;  // at the two jump points
    double min_abs_fy = 0.0;   // at the two jump points
    int fold_count = 0;
};

// Nondegeneracy checks; Field must provide templated f/fx/fxx/fy.
template <class Field>
ValidationReport validate_nondegenerate(const Field& field, const curve::SlowCurveModel& model,
                                        int grid);

struct Family {
    curve::SlowCurveModel model{0.5};
    curve::SectionSet sections{};
    SegmentLadder ladder = SegmentLadder::fixture(1);
    BuildOptions options{};
    LambdaProfile lambda_minus = LambdaProfile::constant(-2.0);
    LambdaProfile lambda_plus = LambdaProfile::constant(2.0);
    FastField field;
};

// Build the full family (profiles + field + soundness checks).
Family build_family(const curve::SlowCurveModel& model, const curve::SectionSet& sections,
                    const SegmentLadder& ladder, const BuildOptions& opts = {});

std::string family_to_json(const Family& fam);
Family family_from_json(const std::string& text);
void save_family(const Family& fam, const std::string& path);
Family load_family(const std::string& path);

// ---- implementation of the templated validator ----

template <class Field>
ValidationReport validate_nondegenerate(const Field& field, const curve::SlowCurveModel& model,
                                        int grid) {
    if (grid <= 0) throw DomainError("validate_nondegenerate: grid must be positive");
    ValidationReport rep;
    rep.min_abs_fx = 1e300;

    const double fold_exclusion = 1e-3;
    for (int i = 0; i <= grid; ++i) {
        const double y = -1.0 + 2.0 * i / grid;
        if (std::fabs(y) >= 1.0 - fold_exclusion) continue;
        for (const auto sign : {curve::BranchSign::attracting, curve::BranchSign::repelling}) {
            const double x = model.branch(sign, y);
            const double v = field.template fx<double>(x, y);
            rep.min_abs_fx = std::min(rep.min_abs_fx, std::fabs(v));
            if (!(std::fabs(v) >= 1e-8)) {
                rep.pass = false;
                rep.failures.push_back("f'_x vanishes on the slow curve at y=" +
                                       std::to_string(y));
            }
            if (!(std::fabs(x) < geom::kPi - 1e-9)) {
                rep.pass = false;
                rep.failures.push_back("slow curve leaves the fundamental square at y=" +
                                       std::to_string(y));
            }
        }
    }

    rep.min_abs_fxx = 1e300;
    rep.min_abs_fy = 1e300;
    for (const double yg : {1.0, -1.0}) {
        const double fxx = field.template fxx<double>(0.0, yg);
        const double fy = field.template fy<double>(0.0, yg);
        rep.min_abs_fxx = std::min(rep.min_abs_fxx, std::fabs(fxx));
        rep.min_abs_fy = std::min(rep.min_abs_fy, std::fabs(fy));
        if (!(std::fabs(fxx) >= 1e-6)) {
            rep.pass = false;
            rep.failures.push_back("f''_xx degenerate at jump point y=" + std::to_string(yg));
        }
        if (!(std::fabs(fy) >= 1e-6)) {
            rep.pass = false;
            rep.failures.push_back("f'_y degenerate at jump point y=" + std::to_string(yg));
        }
    }

    // Fold count: merges of the two branches, i.e. transversal solutions of
    // a(y) = 1 on [-pi, pi).
    rep.fold_count = 0;
    int m = 4 * grid;
    double prev = model.a<double>(-geom::kPi) - 1.0;
    for (int i = 1; i <= m; ++i) {
        const double y = -geom::kPi + geom::kTwoPi * i / m;
        const double cur = model.a<double>(y) - 1.0;
        if ((prev < 0.0 && cur >= 0.0) || (prev > 0.0 && cur <= 0.0)) ++rep.fold_count;
        prev = cur;
    }
    if (rep.fold_count != 2) {
        rep.pass = false;
        rep.failures.push_back("expected exactly two fold points, found " +
                               std::to_string(rep.fold_count));
    }
    return rep;
}

} // namespace torcan::family

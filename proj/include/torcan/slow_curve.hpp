#pragma once

#include <cmath>
#include <utility>

#include "torcan/errors.hpp"
#include "torcan/scalar.hpp"
#include "torcan/torus_geom.hpp"

namespace torcan::curve {

enum class BranchSign { attracting, repelling }; // attracting = M^-, repelling = M^+

// Slow curve given as the zero set of cos x - a(y) with
//   a(y) = 1 - (cos y - cos 1) * (c + d sin y).
// The profile pins the fold points at (0, -1) and (0, +1) exactly and has
// no other folds while c > |d| and the oval stays inside the open
// fundamental square. The skew d tilts the oval so that a'(y) does not
// vanish at y = 0; the pure even profile (d = 0) makes the first-order
// slow-manifold offset degenerate exactly at the Fenichel checkpoint.
class SlowCurveModel {
public:
    explicit SlowCurveModel(double amplitude = 0.5, double skew = 0.15)
        : c_(amplitude), d_(skew) {
        const double c_max = 2.0 / (1.0 - std::cos(1.0));
        if (!(c_ > 0.0) || !(c_ < c_max)) {
            throw DomainError("SlowCurveModel: amplitude must lie in (0, 2/(1-cos 1))");
        }
        if (!(std::fabs(d_) < c_)) {
            throw DomainError("SlowCurveModel: |skew| must stay below the amplitude");
        }
        if (!((c_ + std::fabs(d_)) * (1.0 - std::cos(1.0)) < 2.0)) {
            throw DomainError("SlowCurveModel: profile dips to the far side of the torus");
        }
    }

    double amplitude() const { return c_; }
    double skew() const { return d_; }

    template <class S>
    S a(S y) const {
        return S(1.0) - (sc_cos(y) - cos_one<S>()) * (S(c_) + S(d_) * sc_sin(y));
    }

    template <class S>
    S a_prime(S y) const {
        const S g = S(c_) + S(d_) * sc_sin(y);
        const S h = sc_cos(y) - cos_one<S>();
        return sc_sin(y) * g - h * S(d_) * sc_cos(y);
    }

    template <class S>
    S a_second(S y) const {
        const S sy = sc_sin(y), cy = sc_cos(y);
        const S g = S(c_) + S(d_) * sy;
        const S h = cy - cos_one<S>();
        return cy * g + S(2.0) * S(d_) * sy * cy + S(d_) * h * sy;
    }

    // Branch evaluator; only defined strictly inside the strip |y| < 1.
    double branch(BranchSign sign, double y) const {
        if (!(std::fabs(y) < 1.0)) {
            throw DomainError("SlowCurveModel::branch: |y| must be < 1");
        }
        const double av = a<double>(y);
        const double x = std::acos(std::min(1.0, std::max(-1.0, av)));
        return sign == BranchSign::attracting ? x : -x;
    }

    std::pair<geom::TorusPoint, geom::TorusPoint> jump_points() const {
        return {geom::TorusPoint{0.0, 1.0}, geom::TorusPoint{0.0, -1.0}}; // G^-, G^+
    }

    // sin of the attracting-branch x position, sqrt(1 - a^2); zero at folds.
    template <class S>
    S branch_sine(S y) const {
        const S av = a<S>(y);
        const S s2 = S(1.0) - av * av;
        return s2 > S(0.0) ? sc_sqrt(s2) : S(0.0);
    }

private:
    template <class S>
    static S cos_one() {
        static const S v = sc_cos(S(1.0));
        return v;
    }

    double c_;
    double d_;
};

// Cross-sections: Sigma^- = {x=0, y in I_delta}, Sigma^+ = {x=pi, ...},
// and the transversals J^+/J^- at y = alpha^+/alpha^-.
struct SectionSet {
    double delta = 0.02;
    double delta_plus = 0.01;
    double delta_minus = 0.01;

    double i_delta_lo() const { return -1.0 + delta; }
    double i_delta_hi() const { return 1.0 - delta; }
    double alpha_plus() const { return 1.0 - delta_plus; }
    double alpha_minus() const { return -1.0 + delta_minus; }

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) {
            throw DomainError("SectionSet: delta must lie in (0, 1)");
        }
        if (!(delta_plus > 0.0 && delta_plus < delta) ||
            !(delta_minus > 0.0 && delta_minus < delta)) {
            throw DomainError("SectionSet: delta_pm must lie in (0, delta)");
        }
    }
};

} // namespace torcan::curve

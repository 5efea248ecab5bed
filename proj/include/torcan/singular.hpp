#pragma once

// The epsilon = 0 layer: expansion/contraction integrals Phi over slow-curve
// arcs, the singular release map beta, inclusion checks and the cycle
// prediction report.

#include <optional>
#include <string>
#include <vector>

#include "torcan/errors.hpp"
#include "torcan/ladder.hpp"
#include "torcan/profile.hpp"
#include "torcan/slow_curve.hpp"

namespace torcan::singular {

// Phi over the projected arc [y1, y2] of one branch: the signed integral
// of lambda. Adaptive quadrature, absolute tolerance abs_tol.
double phi(const family::LambdaProfile& lambda, double y1, double y2,
           double abs_tol = 1e-12);

struct BetaTabRow {
    double y = 0.0;
    double beta = 0.0;
    double beta_prime = 0.0;
};

// Singular release map: beta(y) solves
//   Phi^-(y, 1) + Phi^+(-1, beta(y)) = 0,
// strictly decreasing where defined.
class ReleaseMap {
public:
    ReleaseMap(family::LambdaProfile lambda_minus, family::LambdaProfile lambda_plus,
               curve::SectionSet sections, double residual_tol = 1e-10);

    // Root of the defining identity; throws DomainError ("release
    // undefined") when |Phi^-(y,1)| >= Phi^+(-1,1).
    double beta(double y) const;

    // beta'(y) = lambda^-(y) / lambda^+(beta(y)).
    double beta_derivative(double y) const;

    // Residual of the defining identity at (y, beta(y)); asserted <= tol.
    double residual(double y, double beta_y) const;

    bool beta_defined(double y) const;

    std::vector<BetaTabRow> tabulate(int points) const;

    const family::LambdaProfile& lambda_minus() const { return lm_; }
    const family::LambdaProfile& lambda_plus() const { return lp_; }
    const curve::SectionSet& sections() const { return sections_; }

    double phi_minus_to_top(double y) const;  // Phi^-(y, 1)
    double phi_plus_cumulative(double b) const; // Phi^+(-1, b)

private:
    family::LambdaProfile lm_;
    family::LambdaProfile lp_;
    curve::SectionSet sections_;
    double tol_;
    double phi_plus_total_ = 0.0;
    std::vector<double> cum_breaks_;  // breakpoints of lambda_plus in [-1,1]
    std::vector<double> cum_values_;  // Phi^+(-1, break)
};

struct InclusionRow {
    std::string label;
    double margin_lo = 0.0;
    double margin_hi = 0.0;
    bool pass() const { return margin_lo > 0.0 && margin_hi > 0.0; }
};

struct InclusionReport {
    std::vector<InclusionRow> rows;
    bool pass() const {
        for (const auto& r : rows) {
            if (!r.pass()) return false;
        }
        return true;
    }
};

// The beta-inclusion system; monotone beta reduces every row to endpoint
// comparisons. The a-row and b-row coincide at i = n+1 by the index
// conventions, so it is emitted once.
InclusionReport check_inclusions(const ReleaseMap& map, const family::SegmentLadder& ladder);

enum class Stability { attracting, repelling };

struct PredictedCycle {
    std::string segment_label;
    double seg_lo = 0.0;
    double seg_hi = 0.0;
    int ladder_index = 0; // i of omega^a_i / omega^b_i
    Stability stability = Stability::attracting;
    double fixed_point = 0.0;       // fixed point of beta(beta(.)) inside the segment
    double multiplier_constant = 0.0; // beta'(beta(y*)) * beta'(y*)
};

struct PredictionReport {
    int cycle_count = 0; // l = 2n+1
    std::vector<PredictedCycle> cycles;
    InclusionReport inclusions;
};

PredictionReport predict(const ReleaseMap& map, const family::SegmentLadder& ladder);

struct BetaBetaFixedPoint {
    double y = 0.0;
    double multiplier = 0.0;
};

struct BetaBetaScan {
    std::vector<BetaBetaFixedPoint> fixed_points;
    bool degenerate_identity = false; // beta o beta == id within 1e-9 on the grid
    std::vector<std::pair<double, double>> undefined_spans;
};

BetaBetaScan beta_beta_fixed_points(const ReleaseMap& map, double lo, double hi, int grid);

} // namespace torcan::singular

#pragma once

// Grand-canard window detection over eps, the in-window census against the
// singular prediction, and rotation-number sweeps.

#include <optional>
#include <string>
#include <vector>

#include "torcan/family.hpp"
#include "torcan/flow.hpp"
#include "torcan/poincare.hpp"
#include "torcan/singular.hpp"

namespace torcan::hunter {

// Tier policy: extended below eps = 0.03, standard above, unless forced.
flow::FlowConfig make_flow_config(double eps, std::optional<flow::Tier> forced = std::nullopt);

struct WindowRecord {
    int scan_order = 0;   // 0 = largest-eps window found
    int n = 0;            // absolute rotation index (fitted, eps_n ~ C/n)
    double eps_lo = 0.0;
    double eps_mid = 0.0;
    double eps_hi = 0.0;
    double width = 0.0;      // may underflow double; see log10_width
    double log10_width = 0.0;
    double gap_mid = 0.0;    // residual wrapped gap at eps_mid (numeric floor)
    double gap_slope = 0.0;  // d(gap)/d(eps) at the crossing
    double log10_halfwidth_sum = 0.0;
};

struct ScanOptions {
    int initial_grid = 64; // nodes uniform in 1/eps
    int max_refine_rounds = 14;
    std::optional<flow::Tier> tier;
};

std::vector<WindowRecord> scan_windows(const family::Family& fam, double eps_lo, double eps_hi,
                                       const ScanOptions& opts = {});

std::pair<flow::IntervalTrack, flow::IntervalTrack> tracks(const family::Family& fam,
                                                           const flow::FlowConfig& cfg);

enum class CensusVerdict { pass, fail, no_grand_canard, undefined };

std::string to_string(CensusVerdict v);

struct SegmentCheck {
    std::string label;
    int found = 0;
    bool stability_ok = false;
    double y_fixed = 0.0;
    double multiplier = 0.0;
    double predicted_multiplier = 0.0;
    double defined_fraction = 0.0;
};

struct CensusResult {
    double eps = 0.0;
    CensusVerdict verdict = CensusVerdict::undefined;
    int canard_count = 0;
    int predicted_count = 0;
    std::vector<SegmentCheck> segments;
    std::vector<poincare::CycleRecord> canards;
    std::vector<poincare::CycleRecord> non_canards;
    double defined_fraction = 0.0; // of the Q-grid over I_delta
};

struct CensusOptions {
    int grid = 96;        // Q-map nodes across I_delta
    int circle_grid = 96; // Gamma-section nodes for the non-canard scan
    std::optional<flow::Tier> tier;
};

CensusResult census(const family::Family& fam, double eps,
                    const singular::PredictionReport& prediction,
                    const CensusOptions& opts = {});

struct StaircaseRow {
    double eps = 0.0;
    double rho = 0.0;
    int iterations = 0;
    int plateau_id = -1;
    bool ok = false;
    std::string error;
};

struct StaircaseTable {
    std::vector<StaircaseRow> rows;
    int iterations = 0;
};

StaircaseTable staircase(const family::Family& fam, const std::vector<double>& eps_grid, int N,
                         std::optional<flow::Tier> tier = std::nullopt);

// Convergence diagnostics used by the ideal-map and multiplier criteria.
struct ConvergenceSample {
    double eps = 0.0;
    double sup_q_deviation = 0.0; // sup over predicted segments of |Q - beta(beta(.))|
    std::vector<double> multiplier_errors; // per predicted segment, census order
};

ConvergenceSample convergence_sample(const family::Family& fam, double eps,
                                     const singular::PredictionReport& prediction, int grid = 24,
                                     std::optional<flow::Tier> tier = std::nullopt);

// CSV / JSON renderers (deterministic, printf-%.17g doubles).
std::string windows_csv(const std::vector<WindowRecord>& windows);
std::string staircase_csv(const StaircaseTable& table);
std::string census_csv(const CensusResult& census);
std::string census_json(const CensusResult& census);
std::string beta_csv(const singular::ReleaseMap& map, int points);
std::string prediction_json(const singular::PredictionReport& report);

} // namespace torcan::hunter

#pragma once

// Section-to-section Poincare machinery: the vertical half maps
// Q^-: Sigma^- -> Sigma^+ and Q^+: Sigma^+ -> Sigma^-, their composition
// Q_eps with exact variational multipliers, the cycle census and the
// circle map on the global cross-section Gamma = {y = pi}.
//
// Everything is computed by two-sided shooting at the torus cut
// {y = pi == -pi}: the forward orbit of a point is integrated to the cut
// in its stable direction, the candidate release orbit backwards in its
// stable direction, and the two are matched there. Because section images
// contract like exp(-Phi/eps), the cut offsets are carried in signed-log
// form (measured against the two canonical transversal orbits while the
// separation is still representable, then transported variationally).

#include <memory>
#include <string>
#include <vector>

#include "torcan/family.hpp"
#include "torcan/flow.hpp"
#include "torcan/singular.hpp"

namespace torcan::poincare {

enum class Undef {
    none,
    outside_domain,   // query y outside I_delta
    wrong_side,       // orbit released on the side that misses the target section
    outside_strip,    // release point leaves I_delta (Q undefined per the gap condition)
    gauge_unresolved, // offset cancelled below the numeric floor
};

std::string to_string(Undef u);

struct HalfMap {
    double y_out = 0.0;
    double derivative = 0.0; // signed d(y_out)/d(y_in); negative for a half map
    double residual = 0.0;   // |x_b - x_f| at the cut, gauge form
    double log_offset = 0.0; // ln |G| of the matched cut offset
};

struct Outcome {
    bool defined = false;
    Undef reason = Undef::none;
    HalfMap map{};
};

struct CutData {
    double gap = 0.0;            // wrapped gap between canonical cut points
    flow::IntervalTrack d_plus;  // J^+ transported backward to y = -pi
    flow::IntervalTrack d_minus; // J^- transported forward to y = +pi
};

struct CircleStep {
    double x_image = 0.0;     // wrapped
    double displacement = 0.0; // unwrapped x increment over one y-period
    std::vector<flow::CrossingEvent> events;
};

struct CycleRecord {
    double eps = 0.0;
    double y_fixed = 0.0; // on Sigma^- for two-pass records; x on Gamma for one-pass
    double multiplier = 0.0;
    bool canard = false;
    int passes = 2;
    singular::Stability stability = singular::Stability::attracting;
    std::string segment_label = "unlabeled";
    bool near_parabolic = false;
};

struct EngineOptions {
    double j_halfwidth = 1e-3;    // half-width of the transversals J^+/J^-
    double theta_switch = 0.0;    // 0 -> tier default (1e-6 std, 1e-10 ext)
    double gap_floor = 0.0;       // 0 -> tier default (1e-7 std, 1e-15 ext)
    int release_max_iter = 60;
};

class SectionEngine {
public:
    SectionEngine(const family::Family& fam, const flow::FlowConfig& cfg,
                  const EngineOptions& opts = {});
    ~SectionEngine();
    SectionEngine(SectionEngine&&) noexcept;
    SectionEngine& operator=(SectionEngine&&) noexcept;

    const CutData& cut() const;
    double eps() const;

    Outcome half_map_minus(double y) const;
    Outcome half_map_plus(double y) const;
    Outcome full_map(double y) const;

    // Fixed points of Q_eps on the given y-segments; each refined by
    // bisection to 1e-10 and classified.
    std::vector<CycleRecord> find_cycles(const std::vector<family::Segment>& segments,
                                         int grid) const;

    CircleStep circle_map(double x) const;

    // Birkhoff average of the lift over `iterations` periods, measured
    // along the flow's winding direction (positive by convention).
    double rotation_number(double x0, int iterations) const;

    // One- and two-pass cycles found on the circle section Gamma = {y=pi};
    // complements the Sigma-based census with the non-canard cycles.
    std::vector<CycleRecord> circle_section_cycles(int grid) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace torcan::poincare

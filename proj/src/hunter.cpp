#include "torcan/hunter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace torcan::hunter {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double logaddexp(double a, double b) {
    const double m = std::max(a, b);
    if (m <= -1e299) return -1e300;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct GapSample {
    double eps = 0.0;
    double gap = 0.0;
    double log_hw_sum = 0.0;
};

GapSample sample_gap(const family::Family& fam, double eps, std::optional<flow::Tier> tier) {
    const auto cfg = make_flow_config(eps, tier);
    poincare::SectionEngine engine(fam, cfg);
    GapSample s;
    s.eps = eps;
    s.gap = engine.cut().gap;
    s.log_hw_sum =
        logaddexp(engine.cut().d_plus.log_halfwidth, engine.cut().d_minus.log_halfwidth);
    return s;
}

// Deterministic parallel map over a list of eps nodes.
std::vector<GapSample> sample_many(const family::Family& fam, const std::vector<double>& eps,
                                   std::optional<flow::Tier> tier) {
    std::vector<GapSample> out(eps.size());
    const unsigned jobs = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    for (unsigned j = 0; j < jobs; ++j) {
        futures.push_back(std::async(std::launch::async, [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= eps.size()) break;
                out[i] = sample_gap(fam, eps[i], tier);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return out;
}

} // namespace

flow::FlowConfig make_flow_config(double eps, std::optional<flow::Tier> forced) {
    flow::FlowConfig cfg;
    cfg.eps = eps;
    cfg.tier = forced.value_or(eps < 0.03 ? flow::Tier::extended : flow::Tier::standard);
    if (eps < 0.03) cfg.tier = flow::Tier::extended; // mandatory below the ladder point
    return cfg;
}

std::pair<flow::IntervalTrack, flow::IntervalTrack> tracks(const family::Family& fam,
                                                           const flow::FlowConfig& cfg) {
    poincare::SectionEngine engine(fam, cfg);
    return {engine.cut().d_plus, engine.cut().d_minus};
}

std::vector<WindowRecord> scan_windows(const family::Family& fam, double eps_lo, double eps_hi,
                                       const ScanOptions& opts) {
    if (!(eps_lo > 0.0) || !(eps_lo < eps_hi)) {
        throw DomainError("scan_windows: need 0 < eps_lo < eps_hi");
    }
    const int n0 = std::max(8, opts.initial_grid);

    // Nodes uniform in 1/eps; the relative phase of the two transported
    // transversals advances like C/eps.
    std::vector<double> nodes;
    const double ulo = 1.0 / eps_hi, uhi = 1.0 / eps_lo;
    for (int i = 0; i <= n0; ++i) {
        nodes.push_back(1.0 / (ulo + (uhi - ulo) * i / n0));
    }
    std::sort(nodes.begin(), nodes.end());

    auto samples = sample_many(fam, nodes, opts.tier);

    // Refine until the wrapped gap advances < 0.9*pi between neighbors.
    for (int round = 0; round < opts.max_refine_rounds; ++round) {
        std::vector<double> inserts;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const double diff =
                std::remainder(samples[i].gap - samples[i - 1].gap, geom::kTwoPi);
            if (std::fabs(diff) >= 0.9 * geom::kPi) {
                inserts.push_back(2.0 / (1.0 / samples[i - 1].eps + 1.0 / samples[i].eps));
            }
        }
        if (inserts.empty()) break;
        if (round + 1 == opts.max_refine_rounds) {
            throw NumericalError("scan_windows: grid refinement limit reached");
        }
        auto extra = sample_many(fam, inserts, opts.tier);
        samples.insert(samples.end(), extra.begin(), extra.end());
        std::sort(samples.begin(), samples.end(),
                  [](const GapSample& a, const GapSample& b) { return a.eps < b.eps; });
    }

    // Zero crossings of the wrapped gap (descending eps order => scan order).
    // A crossing of the +-pi identification is not a window; the test uses
    // the locally unwrapped increment.
    std::vector<WindowRecord> windows;
    for (std::size_t i = samples.size() - 1; i >= 1; --i) {
        const GapSample& right = samples[i];
        const GapSample& left = samples[i - 1];
        const double diff = std::remainder(right.gap - left.gap, geom::kTwoPi);
        if (std::fabs(diff) >= 0.9 * geom::kPi) continue;
        const double gl = left.gap;
        const double gr_local = gl + diff;
        const bool crossing = (gl <= 0.0 && gr_local >= 0.0) || (gl >= 0.0 && gr_local <= 0.0);
        if (!crossing || (gl == 0.0 && gr_local == 0.0)) continue;

        // Bisection on the wrapped gap.
        double elo = left.eps, ehi = right.eps;
        double glo = gl;
        GapSample mid_sample = left;
        for (int it = 0; it < 64 && (ehi - elo) > 1e-14 * ehi; ++it) {
            const double mid = 0.5 * (elo + ehi);
            mid_sample = sample_gap(fam, mid, opts.tier);
            const double gm = mid_sample.gap;
            if (gm == 0.0) {
                elo = ehi = mid;
                break;
            }
            if ((gm < 0.0) == (glo < 0.0)) {
                elo = mid;
                glo = gm;
            } else {
                ehi = mid;
            }
        }
        const double eps_mid = 0.5 * (elo + ehi);
        const auto at_mid = sample_gap(fam, eps_mid, opts.tier);

        const double h = 1e-5 * eps_mid;
        const auto s_p = sample_gap(fam, eps_mid + h, opts.tier);
        const auto s_m = sample_gap(fam, eps_mid - h, opts.tier);
        const double slope = std::remainder(s_p.gap - s_m.gap, geom::kTwoPi) / (2.0 * h);

        WindowRecord w;
        w.scan_order = static_cast<int>(windows.size());
        w.eps_mid = eps_mid;
        w.gap_mid = at_mid.gap;
        w.gap_slope = slope;
        w.log10_halfwidth_sum = at_mid.log_hw_sum / std::log(10.0);
        const double log_width = at_mid.log_hw_sum - std::log(std::max(1e-300, std::fabs(slope)));
        w.log10_width = log_width / std::log(10.0);
        w.width = log_width < -700.0 ? 0.0 : std::exp(log_width);
        w.eps_lo = eps_mid - 0.5 * w.width;
        w.eps_hi = eps_mid + 0.5 * w.width;
        windows.push_back(w);
    }

    // Absolute rotation index: fit 1/eps_k ~ s * (k + n0) and shift the
    // scan order by the rounded intercept.
    if (windows.size() >= 3) {
        const auto m = static_cast<double>(windows.size());
        double sum_k = 0.0, sum_u = 0.0, sum_kk = 0.0, sum_ku = 0.0;
        for (const auto& w : windows) {
            const double k = w.scan_order, u = 1.0 / w.eps_mid;
            sum_k += k;
            sum_u += u;
            sum_kk += k * k;
            sum_ku += k * u;
        }
        const double denom = m * sum_kk - sum_k * sum_k;
        const double s = denom != 0.0 ? (m * sum_ku - sum_k * sum_u) / denom : 0.0;
        double offset = 1.0;
        if (s > 0.0) offset = std::max(1.0, std::round(sum_u / (m * s) - sum_k / m));
        for (auto& w : windows) w.n = w.scan_order + static_cast<int>(offset);
    } else {
        for (auto& w : windows) w.n = w.scan_order + 1;
    }
    return windows;
}

std::string to_string(CensusVerdict v) {
    switch (v) {
        case CensusVerdict::pass: return "PASS";
        case CensusVerdict::fail: return "FAIL";
        case CensusVerdict::no_grand_canard: return "NO-GRAND-CANARD";
        case CensusVerdict::undefined: return "UNDEFINED";
    }
    return "?";
}

CensusResult census(const family::Family& fam, double eps,
                    const singular::PredictionReport& prediction, const CensusOptions& opts) {
    const auto cfg = make_flow_config(eps, opts.tier);
    poincare::SectionEngine engine(fam, cfg);

    CensusResult res;
    res.eps = eps;
    res.predicted_count = prediction.cycle_count;

    const double ilo = fam.sections.i_delta_lo();
    const double ihi = fam.sections.i_delta_hi();

    // Definedness sweep across I_delta and per predicted segment.
    int defined_nodes = 0;
    std::vector<double> seg_defined(prediction.cycles.size(), 0.0);
    std::vector<double> seg_total(prediction.cycles.size(), 0.0);
    for (int i = 0; i <= opts.grid; ++i) {
        const double y = ilo + (ihi - ilo) * i / opts.grid;
        const auto oc = engine.full_map(y);
        if (oc.defined) ++defined_nodes;
        for (std::size_t s = 0; s < prediction.cycles.size(); ++s) {
            if (y >= prediction.cycles[s].seg_lo && y <= prediction.cycles[s].seg_hi) {
                seg_total[s] += 1.0;
                if (oc.defined) seg_defined[s] += 1.0;
            }
        }
    }
    res.defined_fraction = static_cast<double>(defined_nodes) / (opts.grid + 1);

    bool undefined_segment = false;
    for (std::size_t s = 0; s < prediction.cycles.size(); ++s) {
        const double frac = seg_total[s] > 0.0 ? seg_defined[s] / seg_total[s] : 0.0;
        if (frac < 0.5) undefined_segment = true;
    }
    if (defined_nodes == 0) {
        res.verdict = CensusVerdict::no_grand_canard;
    } else if (undefined_segment) {
        res.verdict = CensusVerdict::undefined;
    } else {
        res.verdict = CensusVerdict::pass; // provisional; comparison below may flip it
    }

    // Cycle census over the whole strip.
    family::Segment whole{ilo, ihi, "I_delta"};
    res.canards = engine.find_cycles({whole}, opts.grid * 2);
    res.canard_count = static_cast<int>(res.canards.size());

    // Non-canard cycles from the Gamma section, informationally.
    for (const auto& rec : engine.circle_section_cycles(opts.circle_grid)) {
        if (!rec.canard) res.non_canards.push_back(rec);
    }

    if (res.verdict == CensusVerdict::no_grand_canard) {
        return res;
    }

    // Compare against the prediction: exactly one canard per predicted
    // segment with the predicted stability, and no canards elsewhere.
    bool ok = res.canard_count == prediction.cycle_count;
    for (std::size_t s = 0; s < prediction.cycles.size(); ++s) {
        const auto& pred = prediction.cycles[s];
        SegmentCheck chk;
        chk.label = pred.segment_label;
        chk.predicted_multiplier = pred.multiplier_constant;
        chk.defined_fraction = seg_total[s] > 0.0 ? seg_defined[s] / seg_total[s] : 0.0;
        for (const auto& rec : res.canards) {
            if (rec.y_fixed >= pred.seg_lo && rec.y_fixed <= pred.seg_hi) {
                ++chk.found;
                chk.y_fixed = rec.y_fixed;
                chk.multiplier = rec.multiplier;
                chk.stability_ok = rec.stability == pred.stability;
            }
        }
        ok = ok && chk.found == 1 && chk.stability_ok;
        res.segments.push_back(chk);
    }
    for (const auto& rec : res.canards) {
        bool inside = false;
        for (const auto& pred : prediction.cycles) {
            if (rec.y_fixed >= pred.seg_lo && rec.y_fixed <= pred.seg_hi) inside = true;
        }
        if (!inside) ok = false;
    }

    if (res.verdict == CensusVerdict::pass && !ok) {
        res.verdict = CensusVerdict::fail;
    }
    return res;
}

StaircaseTable staircase(const family::Family& fam, const std::vector<double>& eps_grid, int N,
                         std::optional<flow::Tier> tier) {
    StaircaseTable table;
    table.iterations = N;
    for (const double eps : eps_grid) {
        StaircaseRow row;
        row.eps = eps;
        row.iterations = N;
        try {
            const auto cfg = make_flow_config(eps, tier);
            poincare::SectionEngine engine(fam, cfg);
            row.rho = engine.rotation_number(0.0, N);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        table.rows.push_back(row);
    }
    // Plateau annotation: consecutive rho within 2/N share an id.
    int next_id = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!table.rows[i].ok) continue;
        if (i > 0 && table.rows[i - 1].ok &&
            std::fabs(table.rows[i].rho - table.rows[i - 1].rho) <= 2.0 / N) {
            table.rows[i].plateau_id = table.rows[i - 1].plateau_id;
        } else {
            table.rows[i].plateau_id = next_id++;
        }
    }
    return table;
}

ConvergenceSample convergence_sample(const family::Family& fam, double eps,
                                     const singular::PredictionReport& prediction, int grid,
                                     std::optional<flow::Tier> tier) {
    const auto cfg = make_flow_config(eps, tier);
    poincare::SectionEngine engine(fam, cfg);
    singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);

    ConvergenceSample sample;
    sample.eps = eps;
    for (const auto& pred : prediction.cycles) {
        for (int i = 0; i <= grid; ++i) {
            const double y = pred.seg_lo + (pred.seg_hi - pred.seg_lo) * i / grid;
            const auto oc = engine.full_map(y);
            if (!oc.defined) continue;
            const double ideal = rmap.beta(rmap.beta(y));
            sample.sup_q_deviation =
                std::max(sample.sup_q_deviation, std::fabs(oc.map.y_out - ideal));
        }
        // multiplier error at the census fixed point of this segment
        family::Segment seg{pred.seg_lo, pred.seg_hi, pred.segment_label};
        const auto cycles = engine.find_cycles({seg}, grid);
        double err = std::numeric_limits<double>::quiet_NaN();
        if (cycles.size() == 1) {
            err = std::fabs(cycles.front().multiplier - pred.multiplier_constant);
        }
        sample.multiplier_errors.push_back(err);
    }
    return sample;
}

std::string windows_csv(const std::vector<WindowRecord>& windows) {
    std::ostringstream out;
    out << "n,eps_lo,eps_hi,width,gap_mid,eps_mid,log10_width,scan_order\n";
    for (const auto& w : windows) {
        out << w.n << ',' << fmt(w.eps_lo) << ',' << fmt(w.eps_hi) << ',' << fmt(w.width) << ','
            << fmt(w.gap_mid) << ',' << fmt(w.eps_mid) << ',' << fmt(w.log10_width) << ','
            << w.scan_order << '\n';
    }
    return out.str();
}

std::string staircase_csv(const StaircaseTable& table) {
    std::ostringstream out;
    out << "eps,rho,iterations,plateau_id,status\n";
    for (const auto& r : table.rows) {
        out << fmt(r.eps) << ',' << fmt(r.rho) << ',' << r.iterations << ',' << r.plateau_id
            << ',' << (r.ok ? "ok" : "error") << '\n';
    }
    return out.str();
}

std::string census_csv(const CensusResult& census) {
    std::ostringstream out;
    out << "eps,y_fixed,multiplier,stability,canard,passes,segment_label\n";
    auto row = [&](const poincare::CycleRecord& r) {
        out << fmt(r.eps) << ',' << fmt(r.y_fixed) << ',' << fmt(r.multiplier) << ','
            << (r.stability == singular::Stability::attracting ? "attracting" : "repelling")
            << ',' << (r.canard ? "true" : "false") << ',' << r.passes << ',' << r.segment_label
            << '\n';
    };
    for (const auto& r : census.canards) row(r);
    for (const auto& r : census.non_canards) row(r);
    return out.str();
}

std::string census_json(const CensusResult& census) {
    nlohmann::json j;
    j["eps"] = census.eps;
    j["verdict"] = to_string(census.verdict);
    j["canard_count"] = census.canard_count;
    j["predicted_count"] = census.predicted_count;
    j["defined_fraction"] = census.defined_fraction;
    j["segments"] = nlohmann::json::array();
    for (const auto& s : census.segments) {
        j["segments"].push_back({{"label", s.label},
                                 {"found", s.found},
                                 {"stability_ok", s.stability_ok},
                                 {"y_fixed", s.y_fixed},
                                 {"multiplier", s.multiplier},
                                 {"predicted_multiplier", s.predicted_multiplier},
                                 {"defined_fraction", s.defined_fraction}});
    }
    j["non_canard_cycles"] = census.non_canards.size();
    return j.dump(2) + "\n";
}

std::string beta_csv(const singular::ReleaseMap& map, int points) {
    std::ostringstream out;
    out << "y,beta,beta_prime\n";
    for (const auto& row : map.tabulate(points)) {
        out << fmt(row.y) << ',' << fmt(row.beta) << ',' << fmt(row.beta_prime) << '\n';
    }
    return out.str();
}

std::string prediction_json(const singular::PredictionReport& report) {
    nlohmann::json j;
    j["cycle_count"] = report.cycle_count;
    j["cycles"] = nlohmann::json::array();
    for (const auto& c : report.cycles) {
        j["cycles"].push_back(
            {{"segment", c.segment_label},
             {"lo", c.seg_lo},
             {"hi", c.seg_hi},
             {"ladder_index", c.ladder_index},
             {"stability",
              c.stability == singular::Stability::attracting ? "attracting" : "repelling"},
             {"fixed_point", c.fixed_point},
             {"multiplier_constant", c.multiplier_constant}});
    }
    j["inclusions"] = nlohmann::json::array();
    for (const auto& r : report.inclusions.rows) {
        j["inclusions"].push_back({{"label", r.label},
                                   {"margin_lo", r.margin_lo},
                                   {"margin_hi", r.margin_hi},
                                   {"pass", r.pass()}});
    }
    return j.dump(2) + "\n";
}

} // namespace torcan::hunter

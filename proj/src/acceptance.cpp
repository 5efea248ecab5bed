#include "torcan/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "torcan/family.hpp"
#include "torcan/flow.hpp"
#include "torcan/hunter.hpp"
#include "torcan/poincare.hpp"
#include "torcan/singular.hpp"

namespace torcan::accept {

namespace {

using family::Family;
using family::SegmentLadder;

// Shared fixtures, computed lazily so criterion subsets stay cheap.
struct Context {
    std::optional<Family> fam1;
    std::optional<singular::PredictionReport> pred1;
    std::optional<std::vector<hunter::WindowRecord>> windows;
    std::optional<std::vector<hunter::CensusResult>> censuses; // first three windows
    std::optional<std::vector<hunter::ConvergenceSample>> convergence;

    const Family& family1() {
        if (!fam1) {
            fam1 = family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, SegmentLadder::fixture(1));
        }
        return *fam1;
    }

    const singular::PredictionReport& prediction1() {
        if (!pred1) {
            const auto& fam = family1();
            singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);
            pred1 = singular::predict(rmap, fam.ladder);
        }
        return *pred1;
    }

    const std::vector<hunter::WindowRecord>& windows1() {
        if (!windows) {
            windows = hunter::scan_windows(family1(), 0.03, 0.12);
        }
        return *windows;
    }

    std::vector<double> census_eps() {
        const auto& ws = windows1();
        std::vector<double> eps;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, ws.size()); ++i) {
            eps.push_back(ws[i].eps_mid);
        }
        return eps;
    }

    const std::vector<hunter::CensusResult>& censuses1() {
        if (!censuses) {
            std::vector<hunter::CensusResult> out;
            for (const double e : census_eps()) {
                out.push_back(hunter::census(family1(), e, prediction1()));
            }
            censuses = std::move(out);
        }
        return *censuses;
    }

    const std::vector<hunter::ConvergenceSample>& convergence1() {
        if (!convergence) {
            std::vector<hunter::ConvergenceSample> out;
            for (const double e : census_eps()) {
                out.push_back(hunter::convergence_sample(family1(), e, prediction1()));
            }
            convergence = std::move(out);
        }
        return *convergence;
    }
};

struct Checker {
    Context& ctx;
    std::ostringstream detail;
    bool pass = true;

    void require(bool cond, const std::string& msg) {
        if (!cond) {
            pass = false;
            detail << "[failed: " << msg << "] ";
        }
    }
};

CriterionResult run_one(Context& ctx, int id, const std::string& name,
                        const std::function<void(Checker&)>& body) {
    CriterionResult res;
    res.id = id;
    res.name = name;
    Checker chk{ctx, {}, true};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(chk);
    } catch (const std::exception& e) {
        chk.pass = false;
        chk.detail << "[exception: " << e.what() << "]";
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    res.pass = chk.pass;
    res.detail = chk.detail.str();
    return res;
}

void crit1_beta_symmetry(Checker& c) {
    const auto lm = family::LambdaProfile::constant(-2.0);
    const auto lp = family::LambdaProfile::constant(2.0);
    curve::SectionSet sec;
    singular::ReleaseMap rmap(lm, lp, sec);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double y = sec.i_delta_lo() + (sec.i_delta_hi() - sec.i_delta_lo()) * i / 99.0;
        worst = std::max(worst, std::fabs(rmap.beta(y) + y));
    }
    c.detail << "max |beta(y)+y| = " << worst << " ";
    c.require(worst <= 1e-10, "beta symmetry exceeds 1e-10");
    c.require(c.pass, "");
}

void crit2_construction(Checker& c) {
    for (int n = 1; n <= 3; ++n) {
        const auto ladder = SegmentLadder::fixture(n);
        const curve::SlowCurveModel model(0.5);
        const auto built = family::build_profiles(model, ladder);
        c.require(built.report.pass(), "inequalities not strict for n=" + std::to_string(n));
        double min_margin = built.report.min_margin();
        singular::ReleaseMap rmap(built.lambda_minus, built.lambda_plus, curve::SectionSet{});
        const auto incl = singular::check_inclusions(rmap, ladder);
        c.require(incl.pass(), "inclusions fail for n=" + std::to_string(n));
        const auto pred = singular::predict(rmap, ladder);
        c.require(pred.cycle_count == 2 * n + 1, "predicted l != 2n+1 for n=" + std::to_string(n));
        c.detail << "n=" << n << ": l=" << pred.cycle_count << " min margin " << min_margin
                 << "; ";
    }
}

void crit3_beta_derivative(Checker& c) {
    const auto& fam = c.ctx.family1();
    singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);

    // Sample points away from profile breakpoints (beta' jumps there).
    std::vector<double> breaks = fam.lambda_minus.breakpoints();
    const auto bp = fam.lambda_plus.breakpoints();
    breaks.insert(breaks.end(), bp.begin(), bp.end());
    auto clear_of_breaks = [&](double y) {
        for (const double b : breaks) {
            if (std::fabs(y - b) < 5e-3) return false;
        }
        return true;
    };

    const double h = 1e-5;
    double worst = 0.0;
    int used = 0;
    for (int i = 0; i < 40 && used < 20; ++i) {
        double y = -0.9 + 1.8 * i / 39.0;
        if (!clear_of_breaks(y) || !clear_of_breaks(rmap.beta(y))) continue;
        const double analytic = rmap.beta_derivative(y);
        const double fd = (rmap.beta(y + h) - rmap.beta(y - h)) / (2.0 * h);
        worst = std::max(worst, std::fabs(analytic - fd) / std::fabs(analytic));
        ++used;
    }
    c.detail << "points=" << used << " max rel err = " << worst << " ";
    c.require(used >= 20, "not enough clear sample points");
    c.require(worst <= 1e-6, "beta' vs finite differences exceeds 1e-6");
}

void crit4_log_derivative_asymptotics(Checker& c) {
    const auto& fam = c.ctx.family1();
    const double phi_ref = singular::phi(fam.lambda_minus, -0.5, 0.5);
    const double x0 = fam.model.branch(curve::BranchSign::attracting, -0.5);
    std::vector<double> errs;
    for (const double eps : {0.1, 0.05, 0.025}) {
        const auto cfg = hunter::make_flow_config(eps);
        const auto res = flow::advance(fam.field, cfg, x0, -0.5, 0.5);
        errs.push_back(std::fabs(eps * res.L - phi_ref));
    }
    c.detail << "E = {" << errs[0] << ", " << errs[1] << ", " << errs[2] << "} ";
    c.require(errs[1] < errs[0] && errs[2] < errs[1], "E(eps) not strictly decreasing");
    c.require(errs[2] / errs[0] <= 0.5, "E(0.025)/E(0.1) > 0.5");
}

void crit5_fenichel(Checker& c) {
    const auto& fam = c.ctx.family1();
    const double m_at_0 = fam.model.branch(curve::BranchSign::attracting, 0.0);
    auto dist = [&](double eps) {
        const auto cfg = hunter::make_flow_config(eps);
        const auto res = flow::advance(fam.field, cfg, 0.0, -0.9, 0.0);
        return std::fabs(res.x_end - m_at_0);
    };
    const double d1 = dist(0.1), d2 = dist(0.05);
    const double ratio = d2 / d1;
    c.detail << "d(0.1)=" << d1 << " d(0.05)=" << d2 << " ratio=" << ratio << " ";
    c.require(ratio >= 0.3 && ratio <= 0.8, "halving eps does not halve the Fenichel distance");
}

void crit6_windows(Checker& c) {
    const auto& ws = c.ctx.windows1();
    c.detail << "windows found: " << ws.size() << " ";
    c.require(ws.size() >= 3, "fewer than 3 windows in [0.03, 0.12]");
    for (std::size_t i = 1; i < ws.size(); ++i) {
        if (!(ws[i].log10_width < ws[i - 1].log10_width)) {
            c.require(false, "widths not strictly decreasing at scan order " + std::to_string(i));
            break;
        }
    }
    double lo = 1e300, hi = 0.0;
    for (const auto& w : ws) {
        const double p = w.eps_mid * w.n;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    c.detail << "eps*n in [" << lo << ", " << hi << "] ratio " << hi / lo << " ";
    c.require(hi / lo <= 3.0, "eps_n * n ratio exceeds 3");
}

void crit7_census(Checker& c) {
    const auto& ws = c.ctx.windows1();
    c.require(ws.size() >= 3, "need 3 windows");
    if (ws.size() < 3) return;
    const auto& censuses = c.ctx.censuses1();
    bool any_non_canard = false;
    for (std::size_t i = 0; i < censuses.size(); ++i) {
        const auto& cen = censuses[i];
        c.detail << "w" << i << "(eps=" << cen.eps << "): " << hunter::to_string(cen.verdict)
                 << " canards=" << cen.canard_count << "; ";
        c.require(cen.verdict == hunter::CensusVerdict::pass,
                  "census not PASS at window " + std::to_string(i));
        c.require(cen.canard_count == 3, "canard count != 3");
        any_non_canard = any_non_canard || !cen.non_canards.empty();
    }

    // Gap eps: harmonic midpoint between the first two windows.
    const double gap_eps = 2.0 / (1.0 / ws[0].eps_mid + 1.0 / ws[1].eps_mid);
    const auto gap_census = hunter::census(c.ctx.family1(), gap_eps, c.ctx.prediction1());
    c.detail << "gap(eps=" << gap_eps << "): " << hunter::to_string(gap_census.verdict)
             << " canards=" << gap_census.canard_count
             << " non-canards=" << gap_census.non_canards.size() << " ";
    c.require(gap_census.verdict == hunter::CensusVerdict::no_grand_canard,
              "gap eps still has grand canard");
    c.require(gap_census.canard_count == 0, "canards found at gap eps");
    any_non_canard = any_non_canard || !gap_census.non_canards.empty();
    c.require(any_non_canard, "no non-canard cycle reported anywhere");
}

void crit8_ideal_map_convergence(Checker& c) {
    const auto& conv = c.ctx.convergence1();
    c.require(conv.size() >= 3, "need 3 window samples");
    if (conv.size() < 3) return;
    c.detail << "sup|Q - beta^2| = {" << conv[0].sup_q_deviation << ", "
             << conv[1].sup_q_deviation << ", " << conv[2].sup_q_deviation << "} ";
    c.require(conv[1].sup_q_deviation < conv[0].sup_q_deviation &&
                  conv[2].sup_q_deviation < conv[1].sup_q_deviation,
              "sup deviation not strictly decreasing");
}

void crit9_multiplier_convergence(Checker& c) {
    const auto& conv = c.ctx.convergence1();
    c.require(conv.size() >= 3, "need 3 window samples");
    if (conv.size() < 3) return;
    const std::size_t segs = conv[0].multiplier_errors.size();
    for (std::size_t s = 0; s < segs; ++s) {
        const double e0 = conv[0].multiplier_errors[s];
        const double e1 = conv[1].multiplier_errors[s];
        const double e2 = conv[2].multiplier_errors[s];
        c.detail << "seg" << s << ": {" << e0 << ", " << e1 << ", " << e2 << "} ";
        c.require(std::isfinite(e0) && std::isfinite(e1) && std::isfinite(e2),
                  "multiplier error undefined in segment " + std::to_string(s));
        c.require(e1 < e0 && e2 < e1,
                  "multiplier error not strictly decreasing in segment " + std::to_string(s));
    }
}

void crit10_rotation_number(Checker& c) {
    const int N = 200;
    const auto& ws = c.ctx.windows1();
    c.require(ws.size() >= 3, "need 3 windows");
    if (ws.size() < 3) return;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& w = ws[i];
        std::vector<double> rhos;
        for (const double e : {w.eps_lo, w.eps_mid, w.eps_hi}) {
            const auto cfg = hunter::make_flow_config(e);
            poincare::SectionEngine engine(c.ctx.family1(), cfg);
            rhos.push_back(engine.rotation_number(0.0, N));
        }
        const double k = std::floor(rhos[1]);
        const double target = k + 0.5;
        c.detail << "w" << i << ": rho=" << rhos[1] << " target " << target << "; ";
        for (const double r : rhos) {
            c.require(std::fabs(r - target) <= 2.0 / N,
                      "rho not within 2/N of a half-integer in window " + std::to_string(i));
        }
        c.require(std::fabs(rhos[0] - rhos[2]) <= 2.0 / N, "rho not constant across the window");
    }
}

void crit11_determinism(Checker& c) {
    const auto& ws = c.ctx.windows1();
    c.require(!ws.empty(), "no window for determinism check");
    if (ws.empty()) return;
    const double e = ws[0].eps_mid;
    const auto run = [&] {
        const auto cen = hunter::census(c.ctx.family1(), e, c.ctx.prediction1());
        return hunter::census_csv(cen) + hunter::census_json(cen);
    };
    const std::string first = run();
    const std::string second = run();
    c.detail << "bytes=" << first.size() << " ";
    c.require(first == second, "census outputs differ between runs");
}

} // namespace

SuiteResult run_suite(std::ostream& out, const std::vector<int>& only) {
    Context ctx;
    SuiteResult suite;

    const std::vector<std::pair<std::string, std::function<void(Checker&)>>> criteria = {
        {"beta symmetry oracle", crit1_beta_symmetry},
        {"construction soundness n=1..3", crit2_construction},
        {"beta' vs finite differences", crit3_beta_derivative},
        {"log-derivative asymptotics", crit4_log_derivative_asymptotics},
        {"Fenichel distance scaling", crit5_fenichel},
        {"window detection", crit6_windows},
        {"exact canard census", crit7_census},
        {"ideal-map convergence", crit8_ideal_map_convergence},
        {"multiplier convergence", crit9_multiplier_convergence},
        {"half-integer rotation number", crit10_rotation_number},
        {"census determinism", crit11_determinism},
    };

    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto res = run_one(ctx, id, criteria[i].first, criteria[i].second);
        out << (res.pass ? "[PASS] " : "[FAIL] ") << "criterion " << res.id << " ("
            << res.name << ") " << res.detail << "(" << res.seconds << " s)" << std::endl;
        suite.results.push_back(res);
    }
    return suite;
}

} // namespace torcan::accept

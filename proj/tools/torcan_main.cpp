// torcan: build slow-fast families on the two-torus, predict their canard
// cycle structure at eps = 0, and verify it against the integrated flow.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "torcan/acceptance.hpp"
#include "torcan/family.hpp"
#include "torcan/flow.hpp"
#include "torcan/hunter.hpp"
#include "torcan/poincare.hpp"
#include "torcan/singular.hpp"

namespace {

namespace fs = std::filesystem;
using namespace torcan;

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path.string() + " for writing");
    out << content;
}

std::optional<flow::Tier> parse_tier(const std::string& tier) {
    if (tier == "std") return flow::Tier::standard;
    if (tier == "ext") return flow::Tier::extended;
    if (tier == "auto" || tier.empty()) return std::nullopt;
    throw DomainError("unknown tier '" + tier + "' (use std, ext or auto)");
}

struct CommonArgs {
    std::string family_path;
    std::string out_dir = ".";
    std::string tier = "auto";
};

int run(int argc, char** argv) {
    CLI::App app{"slow-fast canard families on the two-torus"};
    app.require_subcommand(1);

    // ---- build ----
    auto* build = app.add_subcommand("build", "construct a family and write the family file");
    int build_n = 1;
    double build_c = 0.5, build_skew = 0.15, build_delta = 0.02, build_gamma = 1.0,
           build_baseline = 2.0;
    std::vector<double> ladder_a, ladder_b;
    std::string build_out = "family.json";
    build->add_option("--n", build_n, "fixture ladder index (0..3)");
    build->add_option("--ladder-a", ladder_a, "explicit a_0..a_{2n+1}")->expected(-1);
    build->add_option("--ladder-b", ladder_b, "explicit b_{-1}, b_0, ..., b_{2n+1}")->expected(-1);
    build->add_option("--c", build_c, "slow-curve amplitude");
    build->add_option("--skew", build_skew, "slow-curve skew");
    build->add_option("--delta", build_delta, "section parameter delta");
    build->add_option("--gamma", build_gamma, "bump excess slack multiplier");
    build->add_option("--baseline", build_baseline, "baseline |lambda| value");
    build->add_option("--family", build_out, "output family file");

    // ---- predict ----
    auto* predict = app.add_subcommand("predict", "singular predictions for a family");
    CommonArgs pa;
    predict->add_option("--family", pa.family_path, "family file")->required();
    predict->add_option("--out-dir", pa.out_dir, "output directory");

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "integrate one orbit and dump it");
    CommonArgs sa;
    double sim_eps = 0.08, sim_x0 = 0.0, sim_y0 = -0.9, sim_y1 = 0.9;
    bool sim_dump = false;
    simulate->add_option("--family", sa.family_path, "family file")->required();
    simulate->add_option("--eps", sim_eps, "epsilon")->required();
    simulate->add_option("--x0", sim_x0, "initial x");
    simulate->add_option("--y0", sim_y0, "initial y");
    simulate->add_option("--y1", sim_y1, "final y");
    simulate->add_option("--tier", sa.tier, "scalar tier: std, ext, auto");
    simulate->add_option("--out-dir", sa.out_dir, "output directory");
    simulate->add_flag("--dump-orbit", sim_dump, "write orbit samples CSV");

    // ---- windows ----
    auto* windows = app.add_subcommand("windows", "scan for grand-canard windows");
    CommonArgs wa;
    std::vector<double> w_range{0.03, 0.12};
    int w_grid = 64;
    windows->add_option("--family", wa.family_path, "family file")->required();
    windows->add_option("--eps-range", w_range, "eps_lo eps_hi")->expected(2);
    windows->add_option("--grid", w_grid, "initial scan nodes (uniform in 1/eps)");
    windows->add_option("--tier", wa.tier, "scalar tier: std, ext, auto");
    windows->add_option("--out-dir", wa.out_dir, "output directory");

    // ---- census ----
    auto* census_cmd = app.add_subcommand("census", "cycle census at one eps vs prediction");
    CommonArgs ca;
    double census_eps = 0.0;
    int census_grid = 96;
    census_cmd->add_option("--family", ca.family_path, "family file")->required();
    census_cmd->add_option("--eps", census_eps, "epsilon")->required();
    census_cmd->add_option("--grid", census_grid, "Q-map grid across I_delta");
    census_cmd->add_option("--tier", ca.tier, "scalar tier: std, ext, auto");
    census_cmd->add_option("--out-dir", ca.out_dir, "output directory");

    // ---- staircase ----
    auto* stair = app.add_subcommand("staircase", "rotation-number sweep");
    CommonArgs ta;
    std::vector<double> t_range{0.03, 0.12};
    int t_grid = 40, t_iters = 200;
    stair->add_option("--family", ta.family_path, "family file")->required();
    stair->add_option("--eps-range", t_range, "eps_lo eps_hi")->expected(2);
    stair->add_option("--grid", t_grid, "sweep nodes (uniform in 1/eps)");
    stair->add_option("--iters", t_iters, "circle-map iterations per node");
    stair->add_option("--tier", ta.tier, "scalar tier: std, ext, auto");
    stair->add_option("--out-dir", ta.out_dir, "output directory");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    std::vector<int> verify_only;
    verify->add_option("--only", verify_only, "criterion ids to run")->expected(-1);

    CLI11_PARSE(app, argc, argv);

    if (build->parsed()) {
        curve::SectionSet sections;
        sections.delta = build_delta;
        sections.delta_plus = build_delta / 2.0;
        sections.delta_minus = build_delta / 2.0;
        family::BuildOptions opts;
        opts.gamma = build_gamma;
        opts.baseline = build_baseline;
        opts.ambient = build_baseline;
        const family::SegmentLadder ladder =
            (!ladder_a.empty() || !ladder_b.empty())
                ? family::SegmentLadder(static_cast<int>(ladder_a.size()) / 2 - 1, ladder_a,
                                        ladder_b)
                : family::SegmentLadder::fixture(build_n);
        const auto fam = family::build_family(curve::SlowCurveModel(build_c, build_skew),
                                              sections, ladder, opts);
        const auto report = family::check_inequalities(fam.lambda_minus, fam.lambda_plus, ladder);
        const auto vrep = family::validate_nondegenerate(fam.field, fam.model, 400);
        family::save_family(fam, build_out);
        std::cout << "family written to " << build_out << "\n"
                  << "inequalities: " << (report.pass() ? "PASS" : "FAIL") << " (min margin "
                  << report.min_margin() << ")\n"
                  << "nondegeneracy: " << (vrep.pass ? "PASS" : "FAIL") << "\n";
        return 0;
    }

    if (predict->parsed()) {
        const auto fam = family::load_family(pa.family_path);
        singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);
        const auto pred = singular::predict(rmap, fam.ladder);
        write_file(fs::path(pa.out_dir) / "prediction.json", hunter::prediction_json(pred));
        write_file(fs::path(pa.out_dir) / "beta.csv", hunter::beta_csv(rmap, 256));
        std::cout << "predicted " << pred.cycle_count << " canard cycles\n";
        return 0;
    }

    if (simulate->parsed()) {
        const auto fam = family::load_family(sa.family_path);
        auto cfg = hunter::make_flow_config(sim_eps, parse_tier(sa.tier));
        flow::AdvanceOptions opt;
        opt.collect_events = true;
        opt.record_samples = sim_dump;
        const auto res = sim_y1 > sim_y0
                             ? flow::advance(fam.field, cfg, sim_x0, sim_y0, sim_y1, opt)
                             : flow::advance_backward(fam.field, cfg, sim_x0, sim_y0, sim_y1, opt);
        if (sim_dump) {
            write_file(fs::path(sa.out_dir) / "orbit.csv", flow::orbit_csv(res.samples));
        }
        std::cout << "x(" << sim_y1 << ") = " << res.x_end << ", L = " << res.L << ", "
                  << res.events.size() << " section crossings\n";
        return 0;
    }

    if (windows->parsed()) {
        const auto fam = family::load_family(wa.family_path);
        hunter::ScanOptions opts;
        opts.initial_grid = w_grid;
        opts.tier = parse_tier(wa.tier);
        const auto ws = hunter::scan_windows(fam, w_range[0], w_range[1], opts);
        write_file(fs::path(wa.out_dir) / "windows.csv", hunter::windows_csv(ws));
        std::cout << ws.size() << " windows in [" << w_range[0] << ", " << w_range[1] << "]\n";
        return 0;
    }

    if (census_cmd->parsed()) {
        const auto fam = family::load_family(ca.family_path);
        singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);
        const auto pred = singular::predict(rmap, fam.ladder);
        hunter::CensusOptions opts;
        opts.grid = census_grid;
        opts.tier = parse_tier(ca.tier);
        const auto cen = hunter::census(fam, census_eps, pred, opts);
        write_file(fs::path(ca.out_dir) / "census.csv", hunter::census_csv(cen));
        write_file(fs::path(ca.out_dir) / "census.json", hunter::census_json(cen));
        std::cout << "census verdict: " << hunter::to_string(cen.verdict) << " ("
                  << cen.canard_count << " canards)\n";
        return 0;
    }

    if (stair->parsed()) {
        const auto fam = family::load_family(ta.family_path);
        std::vector<double> eps_grid;
        const double ulo = 1.0 / t_range[1], uhi = 1.0 / t_range[0];
        for (int i = 0; i <= t_grid; ++i) {
            eps_grid.push_back(1.0 / (uhi - (uhi - ulo) * i / t_grid));
        }
        const auto table = hunter::staircase(fam, eps_grid, t_iters, parse_tier(ta.tier));
        write_file(fs::path(ta.out_dir) / "staircase.csv", hunter::staircase_csv(table));
        int failures = 0;
        for (const auto& r : table.rows) {
            if (!r.ok) ++failures;
        }
        std::cout << table.rows.size() << " nodes, " << failures << " failures\n";
        return failures == 0 ? 0 : 3;
    }

    if (verify->parsed()) {
        const auto suite = accept::run_suite(std::cout, verify_only);
        return suite.all_pass() ? 0 : 1;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const torcan::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const torcan::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const torcan::ConstructionError& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return 2;
    } catch (const torcan::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

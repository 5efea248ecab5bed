#include "torcan/family.hpp"

#include <algorithm>
#include <cmath>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "torcan/singular.hpp"

namespace torcan::family {

namespace {

using singular::phi;

struct RowSpec {
    std::string label;
    // abs Phi over [lo, hi] of one branch on each side
    const LambdaProfile* lhs_profile = nullptr;
    double lhs_lo = 0.0, lhs_hi = 0.0;
    const LambdaProfile* rhs_profile = nullptr;
    double rhs_lo = 0.0, rhs_hi = 0.0;
    bool skipped = false;
};

// The two inequality systems, rows tagged by side and i; any row touching
// an index outside [-1, 2n+2] is emitted as skipped.
std::vector<RowSpec> enumerate_rows(const LambdaProfile& lm, const LambdaProfile& lp,
                                    const SegmentLadder& lad) {
    std::vector<RowSpec> rows;
    const int n = lad.n();
    auto out = [&](int idx) { return lad.index_out_of_range(idx); };

    for (int i = 1; i <= n + 1; i += 2) { // attracting system, odd i
        {
            RowSpec r;
            r.label = "attracting.first[i=" + std::to_string(i) + "]";
            r.skipped = out(2 * i) || out(2 * i + 1) || out(2 * i + 2);
            if (!r.skipped) {
                r.lhs_profile = &lp;
                r.lhs_lo = -1.0;
                r.lhs_hi = lad.b(2 * i);
                r.rhs_profile = &lm;
                r.rhs_lo = lad.a(2 * i + 1);
                r.rhs_hi = lad.a(2 * i + 2);
            }
            rows.push_back(r);
        }
        {
            RowSpec r;
            r.label = "attracting.last[i=" + std::to_string(i) + "]";
            r.skipped = out(2 * i - 1) || out(2 * i - 2) || out(2 * i - 3);
            if (!r.skipped) {
                r.lhs_profile = &lp;
                r.lhs_lo = -1.0;
                r.lhs_hi = lad.a(2 * i - 1);
                r.rhs_profile = &lm;
                r.rhs_lo = lad.b(2 * i - 2);
                r.rhs_hi = lad.b(2 * i - 3);
            }
            rows.push_back(r);
        }
    }
    for (int i = 0; i <= n + 1; i += 2) { // repelling system, even i
        {
            RowSpec r;
            r.label = "repelling.first[i=" + std::to_string(i) + "]";
            r.skipped = out(2 * i) || out(2 * i + 2) || out(2 * i + 1);
            if (!r.skipped) {
                r.lhs_profile = &lm;
                r.lhs_lo = lad.a(2 * i);
                r.lhs_hi = 1.0;
                r.rhs_profile = &lp;
                r.rhs_lo = lad.b(2 * i + 2);
                r.rhs_hi = lad.b(2 * i + 1);
            }
            rows.push_back(r);
        }
        {
            RowSpec r;
            r.label = "repelling.last[i=" + std::to_string(i) + "]";
            r.skipped = out(2 * i - 1) || out(2 * i - 3) || out(2 * i - 2);
            if (!r.skipped) {
                r.lhs_profile = &lm;
                r.lhs_lo = lad.b(2 * i - 1);
                r.lhs_hi = 1.0;
                r.rhs_profile = &lp;
                r.rhs_lo = lad.a(2 * i - 3);
                r.rhs_hi = lad.a(2 * i - 2);
            }
            rows.push_back(r);
        }
    }
    return rows;
}

InequalityReport evaluate_rows(const std::vector<RowSpec>& rows) {
    InequalityReport rep;
    for (const auto& r : rows) {
        InequalityRow row;
        row.label = r.label;
        row.skipped = r.skipped;
        if (!r.skipped) {
            row.lhs = std::fabs(phi(*r.lhs_profile, r.lhs_lo, r.lhs_hi));
            row.rhs = std::fabs(phi(*r.rhs_profile, r.rhs_lo, r.rhs_hi));
            row.margin = row.rhs - row.lhs;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace

InequalityReport check_inequalities(const LambdaProfile& lambda_minus,
                                    const LambdaProfile& lambda_plus,
                                    const SegmentLadder& ladder) {
    return evaluate_rows(enumerate_rows(lambda_minus, lambda_plus, ladder));
}

BuiltProfiles build_profiles(const curve::SlowCurveModel& model, const SegmentLadder& ladder,
                             const BuildOptions& opts) {
    if (!(opts.gamma > 0.0)) throw ConstructionError("build_profiles: gamma must be positive");
    const double e_lo = ladder.core_lo() - opts.core_margin;
    const double e_hi = ladder.core_hi() + opts.core_margin;
    if (!(e_lo > -1.0 && e_hi < 1.0)) {
        throw ConstructionError("build_profiles: core margin pushes past the jump points");
    }

    LambdaProfile lm = LambdaProfile::fold(-1, opts.baseline, model, e_lo, e_hi, opts.ambient);
    LambdaProfile lp = LambdaProfile::fold(+1, opts.baseline, model, e_lo, e_hi, opts.ambient);

    struct Step {
        std::string row_label;
        bool bump_minus; // which profile receives the bump
        double seg_lo, seg_hi;
        bool lhs_from_minus; // which profile the target integral I is read from
        double lhs_lo, lhs_hi;
    };
    std::vector<Step> steps;
    const int n = ladder.n();
    for (int k = 1; k <= n + 1; ++k) { // phase 1, last inequalities
        Step s;
        if (k % 2 == 1) {
            s.row_label = "attracting.last[i=" + std::to_string(k) + "]";
            s.bump_minus = true;
            s.seg_lo = ladder.b(2 * k - 2);
            s.seg_hi = ladder.b(2 * k - 3);
            s.lhs_from_minus = false;
            s.lhs_lo = -1.0;
            s.lhs_hi = ladder.a(2 * k - 1);
        } else {
            s.row_label = "repelling.last[i=" + std::to_string(k) + "]";
            s.bump_minus = false;
            s.seg_lo = ladder.a(2 * k - 3);
            s.seg_hi = ladder.a(2 * k - 2);
            s.lhs_from_minus = true;
            s.lhs_lo = ladder.b(2 * k - 1);
            s.lhs_hi = 1.0;
        }
        steps.push_back(s);
    }
    for (int i = n; i >= 0; --i) { // phase 2, first inequalities
        Step s;
        if (i % 2 == 1) {
            s.row_label = "attracting.first[i=" + std::to_string(i) + "]";
            s.bump_minus = true;
            s.seg_lo = ladder.a(2 * i + 1);
            s.seg_hi = ladder.a(2 * i + 2);
            s.lhs_from_minus = false;
            s.lhs_lo = -1.0;
            s.lhs_hi = ladder.b(2 * i);
        } else {
            s.row_label = "repelling.first[i=" + std::to_string(i) + "]";
            s.bump_minus = false;
            s.seg_lo = ladder.b(2 * i + 2);
            s.seg_hi = ladder.b(2 * i + 1);
            s.lhs_from_minus = true;
            s.lhs_lo = ladder.a(2 * i);
            s.lhs_hi = 1.0;
        }
        steps.push_back(s);
    }

    std::vector<std::string> satisfied;
    auto margins_of = [&](const InequalityReport& rep,
                          const std::vector<std::string>& labels) {
        double m = 1e300;
        for (const auto& row : rep.rows) {
            if (row.skipped) continue;
            if (std::find(labels.begin(), labels.end(), row.label) != labels.end()) {
                m = std::min(m, row.margin);
            }
        }
        return m;
    };

    for (const auto& s : steps) {
        const auto rows_now = enumerate_rows(lm, lp, ladder);
        const auto rep_now = evaluate_rows(rows_now);
        const double prev_min = satisfied.empty() ? 1e300 : margins_of(rep_now, satisfied);
        double delta = std::min(opts.delta_cap * opts.gamma,
                                satisfied.empty() ? opts.delta_cap : 0.5 * prev_min);
        delta = std::max(delta, 1e-12);

        const LambdaProfile& lhs_profile = s.lhs_from_minus ? lm : lp;
        const double target_I = std::fabs(phi(lhs_profile, s.lhs_lo, s.lhs_hi));

        bool placed = false;
        for (int attempt = 0; attempt < 48 && !placed; ++attempt, delta *= 0.5) {
            if (delta < 1e-11) break;
            LambdaProfile lm_try = lm, lp_try = lp;
            try {
                if (s.bump_minus) {
                    lm_try = bump(lm, s.seg_lo, s.seg_hi, target_I, opts.gamma, delta);
                } else {
                    lp_try = bump(lp, s.seg_lo, s.seg_hi, target_I, opts.gamma, delta);
                }
            } catch (const ConstructionError&) {
                continue; // shoulder does not fit; retry with smaller Delta
            }
            const auto rep_try = evaluate_rows(enumerate_rows(lm_try, lp_try, ladder));
            bool ok = true;
            for (const auto& row : rep_try.rows) {
                if (row.skipped) continue;
                const bool must_hold =
                    row.label == s.row_label ||
                    std::find(satisfied.begin(), satisfied.end(), row.label) != satisfied.end();
                if (must_hold && !(row.margin > 0.0)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                lm = lm_try;
                lp = lp_try;
                placed = true;
            }
        }
        if (!placed) {
            throw ConstructionError("build_profiles: could not satisfy " + s.row_label +
                                    " while preserving earlier inequalities");
        }
        satisfied.push_back(s.row_label);
    }

    BuiltProfiles out{lm, lp, check_inequalities(lm, lp, ladder)};
    if (!out.report.pass()) {
        for (const auto& row : out.report.rows) {
            if (!row.skipped && !(row.margin > 0.0)) {
                throw ConstructionError("build_profiles: inequality " + row.label +
                                        " not strict after construction");
            }
        }
    }
    return out;
}

FastField assemble_field(const curve::SlowCurveModel& model, const LambdaProfile& lambda_minus,
                         const LambdaProfile& lambda_plus) {
    if (lambda_minus.is_flat() || lambda_plus.is_flat()) {
        throw DomainError("assemble_field: constant profiles have unbounded amplitude at folds");
    }
    if (lambda_minus.sign() != -1 || lambda_plus.sign() != +1) {
        throw DomainError("assemble_field: profile signs must be (-, +)");
    }
    if (lambda_minus.ambient() != lambda_plus.ambient()) {
        throw DomainError("assemble_field: profiles must share the ambient amplitude");
    }

    // x-range of the branches while either amplitude differs from ambient.
    const double y_lo = std::min(lambda_minus.freeze_lo(), lambda_plus.freeze_lo());
    const double y_hi = std::max(lambda_minus.freeze_hi(), lambda_plus.freeze_hi());
    double x_min = geom::kPi, x_max = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / 2000.0;
        const double x = std::acos(std::clamp(model.a<double>(y), -1.0, 1.0));
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
    }
    if (!(x_min > 1e-6)) {
        throw DomainError("assemble_field: amplitude blend reaches the fold, no partition room");
    }

    const double x0 = 0.45 * x_min;
    const double x1 = 0.95 * x_min;
    const double x2 = x_max + 0.25 * (geom::kPi - x_max);
    const double x3 = x_max + 0.60 * (geom::kPi - x_max);

    FastField field(model, lambda_minus, lambda_plus, lambda_minus.ambient(), x0, x1, x2, x3);

    // Amplitude sanity on a grid: positive and bounded.
    for (int i = 0; i <= 400; ++i) {
        const double y = -1.0 + 2.0 * i / 400.0;
        const double am = lambda_minus.amplitude<double>(y);
        const double ap = lambda_plus.amplitude<double>(y);
        if (!(am > 0.0) || !(ap > 0.0) || !std::isfinite(am) || !std::isfinite(ap)) {
            throw ValidationError("assemble_field: branch amplitude not positive/bounded at y=" +
                                  std::to_string(y));
        }
    }
    return field;
}

Family build_family(const curve::SlowCurveModel& model, const curve::SectionSet& sections,
                    const SegmentLadder& ladder, const BuildOptions& opts) {
    sections.validate();
    Family fam;
    fam.model = model;
    fam.sections = sections;
    fam.ladder = ladder;
    fam.options = opts;
    auto built = build_profiles(fam.model, ladder, opts);
    fam.lambda_minus = built.lambda_minus;
    fam.lambda_plus = built.lambda_plus;
    fam.field = assemble_field(fam.model, fam.lambda_minus, fam.lambda_plus);

    const auto vrep = validate_nondegenerate(fam.field, fam.model, 400);
    if (!vrep.pass) {
        throw ValidationError("build_family: nondegeneracy failed: " + vrep.failures.front());
    }
    return fam;
}

namespace {

nlohmann::json profile_to_json(const LambdaProfile& p) {
    nlohmann::json j;
    j["sign"] = p.sign();
    j["baseline"] = p.baseline();
    j["ambient"] = p.ambient();
    j["core_lo"] = p.core_lo();
    j["core_hi"] = p.core_hi();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& pl : p.plateaus()) {
        arr.push_back({{"lo", pl.lo}, {"hi", pl.hi}, {"value", pl.value},
                       {"shoulder", pl.shoulder}});
    }
    j["plateaus"] = arr;
    return j;
}

LambdaProfile profile_from_json(const nlohmann::json& j, const curve::SlowCurveModel& model) {
    LambdaProfile p = LambdaProfile::fold(j.at("sign").get<int>(),
                                          j.at("baseline").get<double>(), model,
                                          j.at("core_lo").get<double>(),
                                          j.at("core_hi").get<double>(),
                                          j.at("ambient").get<double>());
    for (const auto& pj : j.at("plateaus")) {
        Plateau pl;
        pl.lo = pj.at("lo").get<double>();
        pl.hi = pj.at("hi").get<double>();
        pl.value = pj.at("value").get<double>();
        pl.shoulder = pj.at("shoulder").get<double>();
        p.add_plateau(pl);
    }
    return p;
}

} // namespace

std::string family_to_json(const Family& fam) {
    nlohmann::json j;
    j["curve"] = {{"c", fam.model.amplitude()},
                  {"skew", fam.model.skew()},
                  {"delta", fam.sections.delta},
                  {"delta_plus", fam.sections.delta_plus},
                  {"delta_minus", fam.sections.delta_minus}};
    j["ladder"] = {{"n", fam.ladder.n()},
                   {"a", fam.ladder.a_points()},
                   {"b", fam.ladder.b_points()}};
    j["build"] = {{"baseline", fam.options.baseline},
                  {"gamma", fam.options.gamma},
                  {"ambient", fam.options.ambient},
                  {"core_margin", fam.options.core_margin},
                  {"delta_cap", fam.options.delta_cap}};
    j["profiles"] = {{"lambda_minus", profile_to_json(fam.lambda_minus)},
                     {"lambda_plus", profile_to_json(fam.lambda_plus)}};
    return j.dump(2) + "\n";
}

Family family_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("family_from_json: malformed JSON: ") + e.what());
    }
    try {
        Family fam;
        const auto& jc = j.at("curve");
        fam.model = curve::SlowCurveModel(jc.at("c").get<double>(), jc.at("skew").get<double>());
        fam.sections.delta = jc.at("delta").get<double>();
        fam.sections.delta_plus = jc.at("delta_plus").get<double>();
        fam.sections.delta_minus = jc.at("delta_minus").get<double>();
        fam.sections.validate();

        const auto& jl = j.at("ladder");
        fam.ladder = SegmentLadder(jl.at("n").get<int>(),
                                   jl.at("a").get<std::vector<double>>(),
                                   jl.at("b").get<std::vector<double>>());

        const auto& jb = j.at("build");
        fam.options.baseline = jb.at("baseline").get<double>();
        fam.options.gamma = jb.at("gamma").get<double>();
        fam.options.ambient = jb.at("ambient").get<double>();
        fam.options.core_margin = jb.at("core_margin").get<double>();
        fam.options.delta_cap = jb.at("delta_cap").get<double>();

        fam.lambda_minus = profile_from_json(j.at("profiles").at("lambda_minus"), fam.model);
        fam.lambda_plus = profile_from_json(j.at("profiles").at("lambda_plus"), fam.model);
        fam.field = assemble_field(fam.model, fam.lambda_minus, fam.lambda_plus);
        return fam;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("family_from_json: missing or mistyped field: ") +
                          e.what());
    }
}

void save_family(const Family& fam, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("save_family: cannot open " + path);
    out << family_to_json(fam);
}

Family load_family(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("load_family: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return family_from_json(ss.str());
}

} // namespace torcan::family

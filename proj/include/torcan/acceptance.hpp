#pragma once

// End-to-end verification suite: one entry per criterion, each printing a
// PASS/FAIL line with its measured quantities and runtime.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace torcan::accept {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteResult {
    std::vector<CriterionResult> results;
    bool all_pass() const {
        for (const auto& r : results) {
            if (!r.pass) return false;
        }
        return !results.empty();
    }
};

// Run the suite (all criteria, or the subset listed in `only`), streaming
// one line per criterion to `out`.
SuiteResult run_suite(std::ostream& out, const std::vector<int>& only = {});

} // namespace torcan::accept

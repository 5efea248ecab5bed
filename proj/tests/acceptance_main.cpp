// Acceptance suite runner: prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails. Criterion ids can be passed as
// arguments to run a subset.

#include <cstdlib>
#include <iostream>
#include <vector>

#include "torcan/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        only.push_back(std::atoi(argv[i]));
    }
    const auto suite = torcan::accept::run_suite(std::cout, only);
    if (suite.results.empty()) {
        std::cerr << "no criteria selected\n";
        return 2;
    }
    return suite.all_pass() ? 0 : 1;
}

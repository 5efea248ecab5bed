#pragma once

// Adaptive panel quadrature for piecewise-smooth integrands with known
// breakpoints. Each panel is estimated with 12- and 24-point
// Gauss-Legendre rules; panels are bisected until the pair agrees.

#include <functional>
#include <vector>

namespace torcan::quad {

struct Options {
    double abs_tol = 1e-12;
    int max_depth = 48;
};

// Integral of fn over [lo, hi] (lo <= hi). Breakpoints inside the range
// pre-split the panels. Throws NumericalError on non-convergence.
double integrate(const std::function<double(double)>& fn, double lo, double hi,
                 const std::vector<double>& breakpoints, const Options& opt = {});

inline double integrate(const std::function<double(double)>& fn, double lo, double hi,
                        double abs_tol) {
    Options opt;
    opt.abs_tol = abs_tol;
    return integrate(fn, lo, hi, {}, opt);
}

} // namespace torcan::quad

#pragma once

// Test-only oracles, kept independent of the library's own quadrature and
// root-finding paths.

#include <cmath>
#include <functional>

namespace oracles {

// Composite Simpson on a fixed fine grid; refines until two successive
// resolutions agree.
inline double simpson(const std::function<double(double)>& fn, double lo, double hi,
                      int min_panels = 2048) {
    auto pass = [&](int n) {
        const double h = (hi - lo) / n;
        double sum = fn(lo) + fn(hi);
        for (int i = 1; i < n; ++i) {
            sum += (i % 2 == 1 ? 4.0 : 2.0) * fn(lo + i * h);
        }
        return sum * h / 3.0;
    };
    double prev = pass(min_panels);
    for (int n = 2 * min_panels; n <= 64 * min_panels; n *= 2) {
        const double cur = pass(n);
        if (std::fabs(cur - prev) < 1e-12 * (1.0 + std::fabs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// Plain bisection for a strictly monotone function.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi,
                     double tol = 1e-12) {
    double flo = fn(lo);
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Deterministic LCG for property-style sampling.
struct Lcg {
    unsigned long long state = 0x2545F4914F6CDD1DULL;
    double uniform(double lo, double hi) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        const double u = static_cast<double>((state >> 11) & ((1ULL << 53) - 1)) /
                         static_cast<double>(1ULL << 53);
        return lo + (hi - lo) * u;
    }
};

} // namespace oracles

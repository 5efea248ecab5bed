#pragma once

#include <string>
#include <vector>

#include "torcan/errors.hpp"

namespace torcan::family {

struct Segment {
    double lo = 0.0;
    double hi = 0.0;
    std::string label;

    bool contains(double y) const { return y >= lo && y <= hi; }
    double mid() const { return 0.5 * (lo + hi); }
};

// Ordered point ladder
//   -1 < a_0 < a_1 < ... < a_{2n+1} < b_{2n+1} < ... < b_1 < b_0 < b_{-1} < 1
// with the index conventions b_{2n+2} = a_{2n+1}, a_{2n+2} = b_{2n+1},
// a_{2n+3} = b_{2n} (and the mirrored b_{2n+3} = a_{2n}, which makes the
// two inclusion rows coincide at i = n+1). Indices -1..2n+3 are legal in
// the accessors; the out-of-range test below is what the inequality
// system's skip rule consults.
class SegmentLadder {
public:
    SegmentLadder(int n, std::vector<double> a_points, std::vector<double> b_points)
        : n_(n), a_(std::move(a_points)), b_(std::move(b_points)) {
        if (n_ < 0) throw DomainError("SegmentLadder: n must be >= 0");
        if (a_.size() != static_cast<std::size_t>(2 * n_ + 2)) {
            throw DomainError("SegmentLadder: expected a_0..a_{2n+1}");
        }
        if (b_.size() != static_cast<std::size_t>(2 * n_ + 3)) {
            throw DomainError("SegmentLadder: expected b_{-1}, b_0, ..., b_{2n+1}");
        }
        validate();
    }

    int n() const { return n_; }
    int max_stored_index() const { return 2 * n_ + 1; }

    // True when `idx` lies outside [-1, 2n+2]; rows containing such an
    // index are skipped.
    bool index_out_of_range(int idx) const { return idx < -1 || idx > 2 * n_ + 2; }

    double a(int idx) const {
        if (idx == -1) return -1.0;
        if (idx >= 0 && idx <= 2 * n_ + 1) return a_[static_cast<std::size_t>(idx)];
        if (idx == 2 * n_ + 2) return b(2 * n_ + 1);
        if (idx == 2 * n_ + 3) return b(2 * n_);
        throw DomainError("SegmentLadder: a index out of conventions");
    }

    double b(int idx) const {
        if (idx >= -1 && idx <= 2 * n_ + 1) return b_[static_cast<std::size_t>(idx + 1)];
        if (idx == 2 * n_ + 2) return a(2 * n_ + 1);
        if (idx == 2 * n_ + 3) return a(2 * n_);
        throw DomainError("SegmentLadder: b index out of conventions");
    }

    // omega^a_i = [a_{2i-1}, a_{2i}] for i = 1..n; omega^a_{n+1} is the
    // central segment [a_{2n+1}, b_{2n+1}].
    Segment seg_a(int i) const {
        if (i >= 1 && i <= n_) {
            return {a(2 * i - 1), a(2 * i), "omega_a_" + std::to_string(i)};
        }
        if (i == n_ + 1) {
            return {a(2 * n_ + 1), b(2 * n_ + 1), "omega_a_" + std::to_string(i)};
        }
        throw DomainError("SegmentLadder: seg_a index");
    }

    // omega^b_i = [b_{2i}, b_{2i-1}] for i = 1..n; omega^b_{n+1} coincides
    // with omega^a_{n+1}.
    Segment seg_b(int i) const {
        if (i >= 1 && i <= n_) {
            return {b(2 * i), b(2 * i - 1), "omega_b_" + std::to_string(i)};
        }
        if (i == n_ + 1) return seg_a(n_ + 1);
        throw DomainError("SegmentLadder: seg_b index");
    }

    // All 2n+1 cycle segments in report order: omega^a_1, omega^b_1, ...,
    // omega^a_n, omega^b_n, omega^a_{n+1}.
    std::vector<Segment> cycle_segments() const {
        std::vector<Segment> out;
        for (int i = 1; i <= n_; ++i) {
            out.push_back(seg_a(i));
            out.push_back(seg_b(i));
        }
        out.push_back(seg_a(n_ + 1));
        return out;
    }

    double core_lo() const { return a(0); }
    double core_hi() const { return b(-1); }

    const std::vector<double>& a_points() const { return a_; }
    const std::vector<double>& b_points() const { return b_; }

    // Spec fixture ladders. n=1 uses the published acceptance values;
    // n=0,2,3 are symmetric layouts with the same auxiliary frame.
    static SegmentLadder fixture(int n) {
        switch (n) {
            case 0:
                return SegmentLadder(0, {-0.8, -0.3}, {0.8, 0.7, 0.3});
            case 1:
                return SegmentLadder(1, {-0.8, -0.6, -0.45, -0.1},
                                     {0.8, 0.7, 0.6, 0.45, 0.1});
            case 2:
                return SegmentLadder(2, {-0.8, -0.65, -0.55, -0.42, -0.3, -0.15},
                                     {0.8, 0.7, 0.65, 0.55, 0.42, 0.3, 0.15});
            case 3:
                return SegmentLadder(
                    3, {-0.8, -0.68, -0.6, -0.5, -0.42, -0.32, -0.24, -0.12},
                    {0.8, 0.72, 0.68, 0.6, 0.5, 0.42, 0.32, 0.24, 0.12});
            default:
                throw DomainError("SegmentLadder::fixture: n must be 0..3");
        }
    }

private:
    void validate() const {
        // -1 < a_0 < a_1 < ... < a_{2n+1}
        double prev = -1.0;
        for (int i = 0; i <= 2 * n_ + 1; ++i) {
            if (!(a(i) > prev)) {
                throw DomainError("SegmentLadder: order violated at a_" + std::to_string(i));
            }
            prev = a(i);
        }
        // a_{2n+1} < b_{2n+1} < b_{2n} < ... < b_1
        for (int i = 2 * n_ + 1; i >= 1; --i) {
            if (!(b(i) > prev)) {
                throw DomainError("SegmentLadder: order violated at b_" + std::to_string(i));
            }
            prev = b(i);
        }
        // b_1 < b_0 < b_{-1} < 1
        if (!(b(0) > prev)) throw DomainError("SegmentLadder: order violated at b_0");
        if (!(b(-1) > b(0))) throw DomainError("SegmentLadder: order violated at b_-1");
        if (!(b(-1) < 1.0)) throw DomainError("SegmentLadder: b_-1 must be < 1");
    }

    int n_;
    std::vector<double> a_; // a_0 .. a_{2n+1}
    std::vector<double> b_; // b_{-1}, b_0, .., b_{2n+1}
};

} // namespace torcan::family

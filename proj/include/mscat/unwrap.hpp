#pragma once
// Branch-continuous accumulation of determinant phases along a spectral
// scan.  The first sample anchors the branch, so callers start scans where
// the counting function is within half a state of zero.  Midpoints are
// inserted until no adjacent pair can hide a full wrap.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "linalg.hpp"

namespace mscat {

struct ScanSample {
    double k = 0.0;
    LogDet ld;           // principal-branch factorization output
    double phase = 0.0;  // branch-continuous arg det
};

struct SpectralScan {
    std::vector<ScanSample> samples;  // ascending in k
    int refinements = 0;

    // linear interpolation of the continuous phase; k must lie inside the scan
    double phase_at(double k) const {
        if (samples.size() < 2 || k < samples.front().k || k > samples.back().k)
            throw DomainError("SpectralScan::phase_at: k outside scanned range");
        auto it = std::lower_bound(samples.begin(), samples.end(), k,
                                   [](const ScanSample& s, double kk) { return s.k < kk; });
        if (it == samples.begin()) ++it;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (k - lo.k) / (hi.k - lo.k);
        return lo.phase + t * (hi.phase - lo.phase);
    }

    // snap a fresh principal-branch phase onto this scan's branch
    double rebranch(double k, double principal_phase) const {
        const double guide = phase_at(k);
        return principal_phase +
               2.0 * pi * std::round((guide - principal_phase) / (2.0 * pi));
    }
};

struct ScanBudgetExceeded : RefinementBudgetExceeded {
    SpectralScan partial;
    ScanBudgetExceeded(SpectralScan p, const std::string& what)
        : RefinementBudgetExceeded(what), partial(std::move(p)) {}
};

namespace detail_unwrap {

inline void accumulate_phases(std::vector<ScanSample>& s) {
    s[0].phase = s[0].ld.imag_part;  // anchor: principal value at the first point
    for (size_t i = 1; i < s.size(); ++i)
        s[i].phase =
            s[i - 1].phase + wrap_to_pi(s[i].ld.imag_part - s[i - 1].ld.imag_part);
}

}  // namespace detail_unwrap

// eval: double k -> LogDet.  The grid must be strictly ascending, >= 2 points.
template <class F>
SpectralScan unwrap_scan(const std::vector<double>& grid, F&& eval,
                         int refine_budget = 4000, double max_jump = 0.5 * pi) {
    if (grid.size() < 2) throw DomainError("unwrap_scan: need at least 2 points");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("unwrap_scan: grid must be strictly ascending");

    SpectralScan scan;
    scan.samples.reserve(grid.size());
    for (double k : grid) scan.samples.push_back({k, eval(k), 0.0});

    auto& s = scan.samples;
    size_t i = 0;
    while (i + 1 < s.size()) {
        const double jump = wrap_to_pi(s[i + 1].ld.imag_part - s[i].ld.imag_part);
        const double mid = 0.5 * (s[i].k + s[i + 1].k);
        if (std::abs(jump) < max_jump || mid <= s[i].k || mid >= s[i + 1].k) {
            ++i;
            continue;
        }
        if (scan.refinements >= refine_budget) {
            detail_unwrap::accumulate_phases(s);
            throw ScanBudgetExceeded(std::move(scan),
                                     "unwrap_scan: refinement budget exhausted");
        }
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(i) + 1, {mid, eval(mid), 0.0});
        ++scan.refinements;
    }
    detail_unwrap::accumulate_phases(s);
    return scan;
}

}  // namespace mscat

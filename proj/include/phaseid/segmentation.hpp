#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phaseid/dataset.hpp"

namespace phaseid {

// Low-power segmentation thresholds: power ceiling C (kW) and minimum
// sustained duration T_dur (hours) at the dataset's sampling interval.
struct SegmentParams {
    double c_threshold_kw = 1.0;
    double t_dur_hours = 0.5;
    double delta_t_minutes = 15.0;

    // Minimum run length in samples; never below 1.
    std::size_t min_run_length() const;
};

// Half-open index range [begin,end) into the shared timestamp axis.
struct IndexRun {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const { return end - begin; }
    bool operator==(const IndexRun&) const = default;
};

// The contiguous index runs selected for one meter pair. When no run meets
// the criteria (or too few points survive), fallback_used is set and the
// runs cover every index where both meters have voltage data.
struct SegmentSet {
    std::vector<IndexRun> runs;
    std::size_t total_points = 0;
    bool fallback_used = false;

    std::vector<std::size_t> indices() const;
};

// mask[t] = power present and 0 <= power[t] <= c. Gaps and negative power
// are excluded.
std::vector<bool> low_power_mask(std::span<const double> power, double c_threshold_kw);

// Joint low-power segments for a meter pair: the two low-power masks are
// intersected first (also requiring both voltages present), the result is
// split into maximal contiguous runs, and runs shorter than the minimum run
// length are dropped. If nothing qualifies -- or fewer than min_total_points
// samples survive -- all jointly present indices are used instead with
// fallback_used set.
SegmentSet joint_segments(const MeterSeries& a, const MeterSeries& b, const SegmentParams& params,
                          std::size_t min_total_points = 0);

}  // namespace phaseid

#include "phaseid/segmentation.hpp"

#include <cmath>

#include "phaseid/errors.hpp"

namespace phaseid {

std::size_t SegmentParams::min_run_length() const {
    if (c_threshold_kw < 0.0) throw ContractError("c_threshold_kw must be >= 0");
    if (t_dur_hours < 0.0) throw ContractError("t_dur_hours must be >= 0");
    if (delta_t_minutes <= 0.0) throw ContractError("delta_t_minutes must be > 0");
    double samples = std::ceil(t_dur_hours * 60.0 / delta_t_minutes);
    std::size_t n = static_cast<std::size_t>(samples);
    return n < 1 ? 1 : n;
}

std::vector<std::size_t> SegmentSet::indices() const {
    std::vector<std::size_t> out;
    out.reserve(total_points);
    for (const auto& r : runs)
        for (std::size_t t = r.begin; t < r.end; ++t) out.push_back(t);
    return out;
}

std::vector<bool> low_power_mask(std::span<const double> power, double c_threshold_kw) {
    std::vector<bool> mask(power.size());
    for (std::size_t t = 0; t < power.size(); ++t) {
        double p = power[t];
        mask[t] = !is_missing(p) && p >= 0.0 && p <= c_threshold_kw;
    }
    return mask;
}

namespace {

// Maximal contiguous true runs of `eligible`, keeping only those of at least
// min_len samples.
SegmentSet runs_from_mask(const std::vector<bool>& eligible, std::size_t min_len) {
    SegmentSet set;
    std::size_t t = 0;
    const std::size_t n = eligible.size();
    while (t < n) {
        if (!eligible[t]) {
            ++t;
            continue;
        }
        std::size_t begin = t;
        while (t < n && eligible[t]) ++t;
        if (t - begin >= min_len) {
            set.runs.push_back({begin, t});
            set.total_points += t - begin;
        }
    }
    return set;
}

}  // namespace

SegmentSet joint_segments(const MeterSeries& a, const MeterSeries& b, const SegmentParams& params,
                          std::size_t min_total_points) {
    if (a.power_kw.size() != b.power_kw.size() || a.voltage.size() != b.voltage.size() ||
        a.power_kw.size() != a.voltage.size())
        throw ContractError("joint_segments: meters are not on a shared timestamp axis");

    const std::size_t n = a.power_kw.size();
    const std::size_t min_len = params.min_run_length();

    // Both meters low-power and both voltages present; a missing sample in
    // either meter breaks run contiguity.
    std::vector<bool> eligible(n);
    for (std::size_t t = 0; t < n; ++t) {
        double pa = a.power_kw[t], pb = b.power_kw[t];
        eligible[t] = !is_missing(pa) && pa >= 0.0 && pa <= params.c_threshold_kw &&
                      !is_missing(pb) && pb >= 0.0 && pb <= params.c_threshold_kw &&
                      !is_missing(a.voltage[t]) && !is_missing(b.voltage[t]);
    }

    SegmentSet set = runs_from_mask(eligible, min_len);
    if (!set.runs.empty() && set.total_points >= min_total_points) return set;

    // No qualifying segment (or too few points for a meaningful PCC): use
    // every index where both meters have voltage data.
    SegmentSet fallback;
    fallback.fallback_used = true;
    std::vector<bool> present(n);
    for (std::size_t t = 0; t < n; ++t)
        present[t] = !is_missing(a.voltage[t]) && !is_missing(b.voltage[t]);
    SegmentSet all = runs_from_mask(present, 1);
    fallback.runs = std::move(all.runs);
    fallback.total_points = all.total_points;
    return fallback;
}

}  // namespace phaseid

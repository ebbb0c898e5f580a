#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseid/dataset.hpp"
#include "phaseid/segmentation.hpp"

namespace phaseid {

struct PairMeta {
    std::uint32_t total_points = 0;
    bool fallback_used = false;
    bool degenerate = false;  // zero-variance voltage in either meter
};

// Symmetric correlation-distance matrix over all meter pairs.
// dist = 1 - |pcc| wherever pcc is defined; degenerate pairs get distance 1
// and a NaN pcc so a flat voltage cannot poison the clustering.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> dist;  // n*n row-major, zero diagonal
    std::vector<double> pcc;   // n*n, NaN where undefined
    std::vector<PairMeta> meta;
    std::vector<std::string> meter_ids;

    double distance(std::size_t i, std::size_t j) const { return dist[i * n + j]; }
    double correlation(std::size_t i, std::size_t j) const { return pcc[i * n + j]; }
    const PairMeta& pair_meta(std::size_t i, std::size_t j) const { return meta[i * n + j]; }
};

// Pearson correlation coefficient, two-pass mean-centered form. Requires
// len(x) == len(y) >= 2 (ContractError otherwise). Returns NaN when either
// input has zero variance.
double pcc(std::span<const double> x, std::span<const double> y);

// Eq-style correlation distance: 1 - |p|, clamped to [0,1]; NaN maps to 1.
double correlation_distance(double pcc_value);

struct CorrelationOptions {
    // Fewer qualifying segment points than this triggers the all-data
    // fallback: a PCC over a handful of samples is noise, not signal.
    // 96 points = one day at 15-minute sampling.
    std::size_t min_pcc_samples = 96;
    unsigned workers = 1;  // 0 = hardware concurrency
};

// Full pairwise matrix: joint_segments then pcc on the voltages at the
// selected indices, for every unordered pair. Deterministic at any worker
// count. Fewer than 2 meters is a ContractError.
DistanceMatrix pairwise_distance_matrix(const FeederDataset& ds, const SegmentParams& params,
                                        const CorrelationOptions& options = {});

}  // namespace phaseid

#include "phaseid/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "phaseid/errors.hpp"
#include "phaseid/parallel.hpp"

namespace phaseid {

double pcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("pcc: length mismatch");
    if (x.size() < 2) throw ContractError("pcc: need at least 2 samples");
    const std::size_t n = x.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double correlation_distance(double pcc_value) {
    if (std::isnan(pcc_value)) return 1.0;
    double d = 1.0 - std::fabs(pcc_value);
    return std::clamp(d, 0.0, 1.0);
}

DistanceMatrix pairwise_distance_matrix(const FeederDataset& ds, const SegmentParams& params,
                                        const CorrelationOptions& options) {
    const std::size_t n = ds.meter_count();
    if (n < 2) throw ContractError("pairwise_distance_matrix: need at least 2 meters");
    if (params.delta_t_minutes != ds.delta_t_minutes)
        throw ContractError("pairwise_distance_matrix: SegmentParams sampling interval (" +
                            std::to_string(params.delta_t_minutes) +
                            " min) does not match the dataset (" +
                            std::to_string(ds.delta_t_minutes) + " min)");

    DistanceMatrix m;
    m.n = n;
    m.dist.assign(n * n, 0.0);
    m.pcc.assign(n * n, std::numeric_limits<double>::quiet_NaN());
    m.meta.assign(n * n, PairMeta{});
    m.meter_ids.reserve(n);
    for (const auto& meter : ds.meters) m.meter_ids.push_back(meter.meter_id);

    for (std::size_t i = 0; i < n; ++i) {
        m.pcc[i * n + i] = 1.0;
        std::uint32_t present = 0;
        for (double v : ds.meters[i].voltage)
            if (!is_missing(v)) ++present;
        m.meta[i * n + i] = PairMeta{present, false, false};
    }

    // Unordered pairs in row-major order; each worker owns a contiguous
    // chunk, so the result is identical at any worker count.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    parallel_for_chunks(pairs.size(), options.workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> xs, ys;
        for (std::size_t p = begin; p < end; ++p) {
            auto [i, j] = pairs[p];
            SegmentSet seg =
                joint_segments(ds.meters[i], ds.meters[j], params, options.min_pcc_samples);
            xs.clear();
            ys.clear();
            xs.reserve(seg.total_points);
            ys.reserve(seg.total_points);
            for (const auto& run : seg.runs) {
                for (std::size_t t = run.begin; t < run.end; ++t) {
                    xs.push_back(ds.meters[i].voltage[t]);
                    ys.push_back(ds.meters[j].voltage[t]);
                }
            }
            PairMeta meta;
            meta.total_points = static_cast<std::uint32_t>(seg.total_points);
            meta.fallback_used = seg.fallback_used;
            double r = std::numeric_limits<double>::quiet_NaN();
            if (xs.size() >= 2) r = pcc(xs, ys);
            meta.degenerate = std::isnan(r);
            double d = correlation_distance(r);
            m.dist[i * n + j] = m.dist[j * n + i] = d;
            m.pcc[i * n + j] = m.pcc[j * n + i] = r;
            m.meta[i * n + j] = m.meta[j * n + i] = meta;
        }
    });
    return m;
}

}  // namespace phaseid

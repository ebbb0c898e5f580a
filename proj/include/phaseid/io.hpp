#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaseid/correlation.hpp"
#include "phaseid/dataset.hpp"
#include "phaseid/ensemble.hpp"
#include "phaseid/segmentation.hpp"

namespace phaseid {

// FNV-1a over the dataset's ids, axis and sample bits; stable across runs.
std::uint64_t dataset_fingerprint(const FeederDataset& ds);

// Square matrix CSV with a meter-id header row/column.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& ids,
                      const std::vector<double>& values, std::size_t n,
                      const std::string& artifact_header);

// Compact binary cache of a DistanceMatrix, keyed by (dataset fingerprint,
// segmentation parameters). load returns nullopt on any mismatch or on a
// file from a different format version.
std::string cache_file_name(std::uint64_t fingerprint, const SegmentParams& params,
                            std::size_t min_pcc_samples);
void save_matrix_cache(const DistanceMatrix& m, const std::string& path);
std::optional<DistanceMatrix> load_matrix_cache(const std::string& path);

// Distance matrix with read-through caching; cache_dir empty = no caching.
DistanceMatrix cached_distance_matrix(const FeederDataset& ds, const SegmentParams& params,
                                      const CorrelationOptions& options,
                                      const std::string& cache_dir);

}  // namespace phaseid

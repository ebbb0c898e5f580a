#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "phaseid/clustering.hpp"
#include "phaseid/correlation.hpp"
#include "phaseid/dataset.hpp"

namespace phaseid {

struct EnsembleMember {
    SegmentParams params;
    Partition partition;  // cut at the common target cluster count
};

// Partitions from one (C, T_dur) grid, all over the same meters at the same
// k, ordered by grid position (C-major).
struct Ensemble {
    std::vector<EnsembleMember> members;
    std::size_t target_clusters = 36;  // the 3n* cluster budget
    std::size_t n_meters = 0;
    std::vector<std::string> meter_ids;
};

// Graph whose vertices are every cluster of every member; edge weights are
// Jaccard overlaps of the clusters' meter sets.
struct ClusterGraph {
    std::size_t vertex_count = 0;
    std::vector<std::vector<std::uint32_t>> vertex_members;  // sorted meter indices
    std::vector<std::size_t> member_offset;                  // member m's vertices start here
    std::vector<double> weight;                              // dense V*V, zero diagonal

    double edge(std::size_t x, std::size_t y) const { return weight[x * vertex_count + y]; }
};

// Symmetric similarity in [0,1] with unit diagonal; 1 - sim is a valid
// clustering distance.
struct SimilarityMatrix {
    std::size_t n = 0;
    std::vector<double> sim;
    std::vector<std::string> meter_ids;

    double at(std::size_t i, std::size_t j) const { return sim[i * n + j]; }
};

struct EnsembleOptions {
    Linkage linkage = Linkage::Average;
    CorrelationOptions correlation;
    std::string cache_dir;  // reuse distance matrices across runs when set
};

// Default 3n*: 36 for feeder-scale data, else the largest multiple of 3 that
// is at most N/2 (desk-scale datasets cannot support 36 clusters).
std::size_t default_target_clusters(std::size_t n_meters);

// One member per (C, T_dur) grid cell: distance matrix -> dendrogram -> cut
// at target_clusters. Errors from the correlation/clustering stages are
// re-thrown with the offending grid cell named.
Ensemble build_ensemble(const FeederDataset& ds, const std::vector<double>& c_grid_kw,
                        const std::vector<double>& t_dur_grid_hours, std::size_t target_clusters,
                        const EnsembleOptions& options = {});

ClusterGraph cluster_graph(const Ensemble& ensemble);

// Connected-triple similarity: a pair co-clustered in a member contributes 1
// for that member; otherwise decay * WCT of their two clusters, where WCT
// sums min-edge weights over shared neighbor clusters across the whole
// ensemble graph, normalized by the global maximum triple sum. The matrix is
// the average contribution over members. decay must be in (0,1]; decay = 0
// is also accepted and reduces the matrix to plain co-association.
SimilarityMatrix cts_matrix(const Ensemble& ensemble, const ClusterGraph& graph,
                            double decay = 0.8);

// Hierarchical clustering on 1 - sim, cut at k.
Partition final_partition(const SimilarityMatrix& sim, std::size_t k,
                          Linkage linkage = Linkage::Average);

}  // namespace phaseid

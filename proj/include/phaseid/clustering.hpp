#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phaseid/correlation.hpp"

namespace phaseid {

enum class Linkage { Average, Complete, Single };

Linkage linkage_from_string(const std::string& name);  // ConfigError on unknown
std::string to_string(Linkage linkage);

// One agglomeration step. Cluster ids follow the usual convention: leaves
// are 0..N-1 and the merge recorded at step s creates cluster N+s.
struct Merge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;  // a < b
    double height = 0.0;
    std::uint32_t size = 0;  // members in the merged cluster
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;  // exactly N-1, non-decreasing heights
};

// A flat clustering into k groups. Cluster ids are normalized to the order
// of each cluster's smallest meter index.
struct Partition {
    std::size_t k = 0;
    std::vector<std::uint32_t> assignment;            // meter -> cluster id in [0,k)
    std::vector<std::vector<std::uint32_t>> members;  // cluster id -> sorted meter indices

    static Partition from_assignment(std::vector<std::uint32_t> raw_labels);
    bool same_cluster(std::size_t i, std::size_t j) const { return assignment[i] == assignment[j]; }
};

// Bottom-up agglomeration over a precomputed symmetric distance matrix with
// zero diagonal (ContractError otherwise). Ties on merge height resolve to
// the lexicographically smallest (a,b) cluster-id pair, so the dendrogram is
// a pure function of the matrix. Exact O(N^3); fine through a few thousand
// meters.
Dendrogram agglomerative_cluster(std::size_t n, const std::vector<double>& dist,
                                 Linkage linkage = Linkage::Average);
Dendrogram agglomerative_cluster(const DistanceMatrix& d, Linkage linkage = Linkage::Average);

// Undo the last k-1 merges. k must be in [1, N].
Partition cut(const Dendrogram& dg, std::size_t k);

// Partitions at k = 3, 6, ..., 3*n_max. Requires 3*n_max <= N.
std::vector<Partition> cluster_sweep(const Dendrogram& dg, std::size_t n_max);

// Dendrogram merge list as a JSON string (for external plotting).
std::string dendrogram_to_json(const Dendrogram& dg);

}  // namespace phaseid

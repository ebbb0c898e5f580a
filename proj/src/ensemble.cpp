#include "phaseid/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "phaseid/errors.hpp"
#include "phaseid/io.hpp"

namespace phaseid {

std::size_t default_target_clusters(std::size_t n_meters) {
    if (n_meters >= 36) return 36;
    std::size_t half = n_meters / 2;
    std::size_t k = (half / 3) * 3;
    return k >= 3 ? k : 3;
}

Ensemble build_ensemble(const FeederDataset& ds, const std::vector<double>& c_grid_kw,
                        const std::vector<double>& t_dur_grid_hours, std::size_t target_clusters,
                        const EnsembleOptions& options) {
    if (c_grid_kw.empty() || t_dur_grid_hours.empty())
        throw ConfigError("build_ensemble: empty parameter grid");
    if (target_clusters < 1 || target_clusters > ds.meter_count())
        throw ConfigError("build_ensemble: target cluster count " +
                          std::to_string(target_clusters) + " not in [1, N=" +
                          std::to_string(ds.meter_count()) + "]");

    Ensemble ensemble;
    ensemble.target_clusters = target_clusters;
    ensemble.n_meters = ds.meter_count();
    for (const auto& meter : ds.meters) ensemble.meter_ids.push_back(meter.meter_id);
    ensemble.members.reserve(c_grid_kw.size() * t_dur_grid_hours.size());

    for (double c : c_grid_kw) {
        for (double t_dur : t_dur_grid_hours) {
            SegmentParams params;
            params.c_threshold_kw = c;
            params.t_dur_hours = t_dur;
            params.delta_t_minutes = ds.delta_t_minutes;
            try {
                DistanceMatrix dist =
                    cached_distance_matrix(ds, params, options.correlation, options.cache_dir);
                Dendrogram dg = agglomerative_cluster(dist, options.linkage);
                ensemble.members.push_back({params, cut(dg, target_clusters)});
            } catch (const std::exception& e) {
                throw ConfigError("ensemble member (C=" + std::to_string(c) +
                                  " kW, T_dur=" + std::to_string(t_dur) +
                                  " h) failed: " + e.what());
            }
        }
    }
    return ensemble;
}

ClusterGraph cluster_graph(const Ensemble& ensemble) {
    ClusterGraph g;
    g.member_offset.reserve(ensemble.members.size() + 1);
    for (const auto& member : ensemble.members) {
        g.member_offset.push_back(g.vertex_members.size());
        for (const auto& cluster : member.partition.members) g.vertex_members.push_back(cluster);
    }
    g.member_offset.push_back(g.vertex_members.size());
    g.vertex_count = g.vertex_members.size();

    const std::size_t v = g.vertex_count;
    g.weight.assign(v * v, 0.0);
    for (std::size_t x = 0; x < v; ++x) {
        const auto& mx = g.vertex_members[x];
        for (std::size_t y = x + 1; y < v; ++y) {
            const auto& my = g.vertex_members[y];
            // Jaccard overlap of the two sorted member lists.
            std::size_t inter = 0, ia = 0, ib = 0;
            while (ia < mx.size() && ib < my.size()) {
                if (mx[ia] == my[ib]) { ++inter; ++ia; ++ib; }
                else if (mx[ia] < my[ib]) ++ia;
                else ++ib;
            }
            std::size_t uni = mx.size() + my.size() - inter;
            double w = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
            g.weight[x * v + y] = g.weight[y * v + x] = w;
        }
    }
    return g;
}

SimilarityMatrix cts_matrix(const Ensemble& ensemble, const ClusterGraph& graph, double decay) {
    if (decay < 0.0 || decay > 1.0)
        throw ContractError("cts_matrix: decay factor must be in [0,1]");
    if (ensemble.members.empty()) throw ContractError("cts_matrix: empty ensemble");

    const std::size_t v = graph.vertex_count;
    const std::size_t n = ensemble.n_meters;

    // Triple weights between every cluster pair: sum over shared neighbor
    // clusters z of min(w(x,z), w(y,z)), normalized by the global maximum so
    // the decay factor stays the sole attenuation knob.
    std::vector<double> wct(v * v, 0.0);
    double wct_max = 0.0;
    for (std::size_t x = 0; x < v; ++x) {
        for (std::size_t y = x + 1; y < v; ++y) {
            double sum = 0.0;
            const double* wx = &graph.weight[x * v];
            const double* wy = &graph.weight[y * v];
            for (std::size_t z = 0; z < v; ++z) {
                if (z == x || z == y) continue;
                sum += std::min(wx[z], wy[z]);
            }
            wct[x * v + y] = wct[y * v + x] = sum;
            wct_max = std::max(wct_max, sum);
        }
    }
    if (wct_max > 0.0)
        for (auto& w : wct) w /= wct_max;

    SimilarityMatrix sim;
    sim.n = n;
    sim.meter_ids = ensemble.meter_ids;
    sim.sim.assign(n * n, 0.0);

    const double inv_members = 1.0 / static_cast<double>(ensemble.members.size());
    for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
        const auto& assignment = ensemble.members[m].partition.assignment;
        const std::size_t base = graph.member_offset[m];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double contribution;
                if (assignment[i] == assignment[j]) {
                    contribution = 1.0;
                } else {
                    std::size_t x = base + assignment[i];
                    std::size_t y = base + assignment[j];
                    contribution = decay * wct[x * v + y];
                }
                sim.sim[i * n + j] += contribution * inv_members;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        sim.sim[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) sim.sim[j * n + i] = sim.sim[i * n + j];
    }
    return sim;
}

Partition final_partition(const SimilarityMatrix& sim, std::size_t k, Linkage linkage) {
    const std::size_t n = sim.n;
    if (n < 1 || sim.sim.size() != n * n) throw ContractError("final_partition: bad matrix");
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = i == j ? 0.0 : 1.0 - sim.sim[i * n + j];
    Dendrogram dg = agglomerative_cluster(n, dist, linkage);
    return cut(dg, k);
}

}  // namespace phaseid

#include "phaseid/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "phaseid/errors.hpp"

namespace phaseid {

Linkage linkage_from_string(const std::string& name) {
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    if (name == "single") return Linkage::Single;
    throw ConfigError("unknown linkage '" + name + "' (expected average, complete or single)");
}

std::string to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
        case Linkage::Single: return "single";
    }
    return "average";
}

Partition Partition::from_assignment(std::vector<std::uint32_t> raw_labels) {
    Partition p;
    // Normalize cluster ids to the order of first appearance, i.e. the order
    // of each cluster's smallest meter index.
    std::vector<std::int64_t> remap;
    for (auto label : raw_labels) {
        if (label >= remap.size()) remap.resize(label + 1, -1);
        if (remap[label] < 0) {
            remap[label] = static_cast<std::int64_t>(p.k);
            ++p.k;
        }
    }
    p.assignment.resize(raw_labels.size());
    p.members.resize(p.k);
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        auto c = static_cast<std::uint32_t>(remap[raw_labels[i]]);
        p.assignment[i] = c;
        p.members[c].push_back(static_cast<std::uint32_t>(i));
    }
    return p;
}

namespace {

void validate_square(std::size_t n, const std::vector<double>& dist) {
    if (n < 1) throw ContractError("agglomerative_cluster: empty input");
    if (dist.size() != n * n) throw ContractError("agglomerative_cluster: matrix size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i * n + i] != 0.0)
            throw ContractError("agglomerative_cluster: nonzero diagonal at " + std::to_string(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            double a = dist[i * n + j], b = dist[j * n + i];
            if (!std::isfinite(a) || !std::isfinite(b))
                throw ContractError("agglomerative_cluster: non-finite distance at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            if (a != b)
                throw ContractError("agglomerative_cluster: matrix not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

}  // namespace

Dendrogram agglomerative_cluster(std::size_t n, const std::vector<double>& dist, Linkage linkage) {
    validate_square(n, dist);

    Dendrogram dg;
    dg.n_leaves = n;
    dg.merges.reserve(n - 1);

    // Working copy of inter-cluster distances, indexed by active slot.
    std::vector<double> d = dist;
    std::vector<std::uint32_t> id(n);        // slot -> dendrogram cluster id
    std::vector<std::uint32_t> size(n, 1);   // slot -> member count
    std::vector<bool> active(n, true);
    std::iota(id.begin(), id.end(), 0u);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        // Closest active pair; ties resolve to the smallest (id_a, id_b).
        std::size_t best_i = 0, best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_a = 0, best_b = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                double dij = d[i * n + j];
                std::uint32_t a = std::min(id[i], id[j]);
                std::uint32_t b = std::max(id[i], id[j]);
                if (!found || dij < best || (dij == best && (a < best_a || (a == best_a && b < best_b)))) {
                    found = true;
                    best = dij;
                    best_i = i;
                    best_j = j;
                    best_a = a;
                    best_b = b;
                }
            }
        }

        Merge merge;
        merge.a = best_a;
        merge.b = best_b;
        merge.height = best;
        merge.size = size[best_i] + size[best_j];
        dg.merges.push_back(merge);

        // Lance-Williams update into slot best_i; slot best_j retires.
        double ni = size[best_i], nj = size[best_j];
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == best_i || k == best_j) continue;
            double dik = d[best_i * n + k];
            double djk = d[best_j * n + k];
            double merged;
            switch (linkage) {
                case Linkage::Average: merged = (ni * dik + nj * djk) / (ni + nj); break;
                case Linkage::Complete: merged = std::max(dik, djk); break;
                case Linkage::Single: merged = std::min(dik, djk); break;
                default: merged = (ni * dik + nj * djk) / (ni + nj); break;
            }
            d[best_i * n + k] = d[k * n + best_i] = merged;
        }
        id[best_i] = static_cast<std::uint32_t>(n + step);
        size[best_i] += size[best_j];
        active[best_j] = false;
    }
    return dg;
}

Dendrogram agglomerative_cluster(const DistanceMatrix& d, Linkage linkage) {
    return agglomerative_cluster(d.n, d.dist, linkage);
}

Partition cut(const Dendrogram& dg, std::size_t k) {
    const std::size_t n = dg.n_leaves;
    if (k < 1 || k > n) throw ContractError("cut: k must be in [1, N]");

    // Union-find over the first N-k merges.
    std::vector<std::uint32_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t s = 0; s < n - k; ++s) {
        const Merge& m = dg.merges[s];
        std::uint32_t cluster = static_cast<std::uint32_t>(n + s);
        parent[find(m.a)] = cluster;
        parent[find(m.b)] = cluster;
    }
    std::vector<std::uint32_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = find(static_cast<std::uint32_t>(i));
    Partition p = Partition::from_assignment(std::move(raw));
    if (p.k != k) throw ContractError("cut: produced wrong cluster count");
    return p;
}

std::vector<Partition> cluster_sweep(const Dendrogram& dg, std::size_t n_max) {
    if (n_max < 1 || 3 * n_max > dg.n_leaves)
        throw ContractError("cluster_sweep: need 1 <= 3*n_max <= N");
    std::vector<Partition> out;
    out.reserve(n_max);
    for (std::size_t i = 1; i <= n_max; ++i) out.push_back(cut(dg, 3 * i));
    return out;
}

std::string dendrogram_to_json(const Dendrogram& dg) {
    std::ostringstream os;
    os << "{\"n_leaves\":" << dg.n_leaves << ",\"merges\":[";
    for (std::size_t i = 0; i < dg.merges.size(); ++i) {
        const Merge& m = dg.merges[i];
        if (i) os << ',';
        os << "[" << m.a << ',' << m.b << ',' << m.height << ',' << m.size << ']';
    }
    os << "]}";
    return os.str();
}

}  // namespace phaseid

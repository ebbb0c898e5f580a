#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "phaseid/ensemble.hpp"
#include "phaseid/errors.hpp"
#include "phaseid/rng.hpp"
#include "phaseid/synthetic.hpp"
#include "test_util.hpp"

using namespace phaseid;

namespace {

Ensemble ensemble_of(std::size_t n_meters, const std::vector<std::vector<std::uint32_t>>& members,
                     std::size_t target) {
    Ensemble e;
    e.n_meters = n_meters;
    e.target_clusters = target;
    for (std::size_t m = 0; m < n_meters; ++m) e.meter_ids.push_back("M" + std::to_string(m));
    for (const auto& assignment : members) {
        EnsembleMember member;
        member.partition = Partition::from_assignment(assignment);
        e.members.push_back(std::move(member));
    }
    return e;
}

// Plain co-association: fraction of members in which a pair shares a cluster.
std::vector<double> co_association(const Ensemble& e) {
    std::vector<double> co(e.n_meters * e.n_meters, 0.0);
    for (const auto& member : e.members)
        for (std::size_t i = 0; i < e.n_meters; ++i)
            for (std::size_t j = 0; j < e.n_meters; ++j)
                if (member.partition.same_cluster(i, j)) co[i * e.n_meters + j] += 1.0;
    for (auto& v : co) v /= static_cast<double>(e.members.size());
    return co;
}

}  // namespace

TEST_CASE("default target cluster count") {
    CHECK(default_target_clusters(1100) == 36);
    CHECK(default_target_clusters(90) == 36);
    CHECK(default_target_clusters(36) == 36);
    CHECK(default_target_clusters(35) == 15);  // largest 3m <= 17.5
    CHECK(default_target_clusters(30) == 15);
    CHECK(default_target_clusters(12) == 6);
    CHECK(default_target_clusters(7) == 3);
    CHECK(default_target_clusters(4) == 3);
}

TEST_CASE("cluster graph edges are Jaccard overlaps") {
    Ensemble e = ensemble_of(6, {{0, 0, 0, 1, 1, 1}, {0, 0, 0, 1, 1, 1}}, 2);
    ClusterGraph g = cluster_graph(e);
    REQUIRE(g.vertex_count == 4);
    CHECK(g.edge(0, 2) == 1.0);  // identical clusters across members
    CHECK(g.edge(0, 1) == 0.0);  // disjoint
    CHECK(g.edge(0, 3) == 0.0);

    // member 2 normalizes to clusters {0,4,5} (vertex 2) and {1,2,3} (vertex 3)
    Ensemble e2 = ensemble_of(6, {{0, 0, 0, 1, 1, 1}, {1, 0, 0, 0, 1, 1}}, 2);
    ClusterGraph g2 = cluster_graph(e2);
    CHECK(g2.edge(0, 3) == doctest::Approx(0.5));  // {0,1,2} vs {1,2,3}: 2/4
    CHECK(g2.edge(0, 2) == doctest::Approx(0.2));  // {0,1,2} vs {0,4,5}: 1/5
}

TEST_CASE("cts on the hand-computed two-member fixture") {
    // Members: {0,1,2|3,4,5} and {0,1,3|2,4,5}. The only nonzero normalized
    // triple weights are WCT(X1,Y1) = WCT(X2,Y2) = 1.
    Ensemble e = ensemble_of(6, {{0, 0, 0, 1, 1, 1}, {0, 0, 1, 0, 1, 1}}, 2);
    ClusterGraph g = cluster_graph(e);
    const double dc = 0.8;
    SimilarityMatrix s = cts_matrix(e, g, dc);

    auto at = [&](std::size_t i, std::size_t j) { return s.at(i, j); };
    CHECK(at(0, 1) == doctest::Approx(1.0));
    CHECK(at(4, 5) == doctest::Approx(1.0));
    CHECK(at(0, 2) == doctest::Approx(0.9));  // same in m1, dc*1 in m2
    CHECK(at(1, 2) == doctest::Approx(0.9));
    CHECK(at(0, 3) == doctest::Approx(0.9));  // dc*1 in m1, same in m2
    CHECK(at(1, 3) == doctest::Approx(0.9));
    CHECK(at(0, 4) == doctest::Approx(0.8));  // dc*1 in both
    CHECK(at(0, 5) == doctest::Approx(0.8));
    CHECK(at(1, 4) == doctest::Approx(0.8));
    CHECK(at(1, 5) == doctest::Approx(0.8));
    CHECK(at(2, 3) == doctest::Approx(0.8));
    CHECK(at(2, 4) == doctest::Approx(0.9));  // dc in m1, same in m2
    CHECK(at(2, 5) == doctest::Approx(0.9));
    CHECK(at(3, 4) == doctest::Approx(0.9));
    CHECK(at(3, 5) == doctest::Approx(0.9));
    for (std::size_t i = 0; i < 6; ++i) CHECK(at(i, i) == 1.0);
}

TEST_CASE("identical partitions: same-cluster pairs 1, cross-cluster <= dc") {
    std::vector<std::uint32_t> part{0, 0, 1, 1, 2, 2};
    Ensemble e = ensemble_of(6, {part, part, part}, 3);
    SimilarityMatrix s = cts_matrix(e, cluster_graph(e), 0.8);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = i + 1; j < 6; ++j) {
            if (part[i] == part[j])
                CHECK(s.at(i, j) == doctest::Approx(1.0));
            else
                CHECK(s.at(i, j) <= 0.8 + 1e-12);
        }
    }
    Partition final = final_partition(s, 3);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK((part[i] == part[j]) == final.same_cluster(i, j));
}

TEST_CASE("single member reduces to binary co-membership") {
    Ensemble e = ensemble_of(5, {{0, 0, 1, 1, 2}}, 3);
    SimilarityMatrix s = cts_matrix(e, cluster_graph(e), 0.8);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double expected = e.members[0].partition.same_cluster(i, j) ? 1.0 : 0.0;
            CHECK(s.at(i, j) == doctest::Approx(expected));
        }
}

TEST_CASE("dc = 0 equals the plain co-association matrix") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20;
        std::vector<std::vector<std::uint32_t>> members;
        for (int m = 0; m < 4; ++m) {
            std::vector<std::uint32_t> assignment(n);
            for (auto& a : assignment) a = static_cast<std::uint32_t>(rng.below(5));
            members.push_back(assignment);
        }
        Ensemble e = ensemble_of(n, members, 5);
        SimilarityMatrix s = cts_matrix(e, cluster_graph(e), 0.0);
        std::vector<double> co = co_association(e);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                CHECK(s.at(i, j) == doctest::Approx(co[i * n + j]).epsilon(1e-12));
            }
    }
}

TEST_CASE("similarity matrix invariants on random ensembles") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 15;
        std::vector<std::vector<std::uint32_t>> members;
        for (int m = 0; m < 5; ++m) {
            std::vector<std::uint32_t> assignment(n);
            for (auto& a : assignment) a = static_cast<std::uint32_t>(rng.below(4));
            members.push_back(assignment);
        }
        Ensemble e = ensemble_of(n, members, 4);
        SimilarityMatrix s = cts_matrix(e, cluster_graph(e), 0.8);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(s.at(i, i) == 1.0);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(s.at(i, j) >= 0.0);
                CHECK(s.at(i, j) <= 1.0);
                CHECK(s.at(i, j) == s.at(j, i));
            }
        }
        // co-clustered in every member -> 1; in none with zero triples -> 0
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                bool always = true;
                for (const auto& member : e.members)
                    always = always && member.partition.same_cluster(i, j);
                if (always) CHECK(s.at(i, j) == doctest::Approx(1.0));
            }
    }
}

TEST_CASE("permutation equivariance of the similarity matrix") {
    Rng rng(23);
    const std::size_t n = 12;
    std::vector<std::vector<std::uint32_t>> members;
    for (int m = 0; m < 3; ++m) {
        std::vector<std::uint32_t> assignment(n);
        for (auto& a : assignment) a = static_cast<std::uint32_t>(rng.below(4));
        members.push_back(assignment);
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

    std::vector<std::vector<std::uint32_t>> permuted = members;
    for (std::size_t m = 0; m < members.size(); ++m)
        for (std::size_t i = 0; i < n; ++i) permuted[m][perm[i]] = members[m][i];

    Ensemble e1 = ensemble_of(n, members, 4);
    Ensemble e2 = ensemble_of(n, permuted, 4);
    SimilarityMatrix s1 = cts_matrix(e1, cluster_graph(e1), 0.8);
    SimilarityMatrix s2 = cts_matrix(e2, cluster_graph(e2), 0.8);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            CHECK(s1.at(i, j) == doctest::Approx(s2.at(perm[i], perm[j])).epsilon(1e-12));
}

TEST_CASE("decay factor is validated") {
    Ensemble e = ensemble_of(4, {{0, 0, 1, 1}}, 2);
    ClusterGraph g = cluster_graph(e);
    CHECK_THROWS_AS(cts_matrix(e, g, -0.1), ContractError);
    CHECK_THROWS_AS(cts_matrix(e, g, 1.1), ContractError);
    CHECK_NOTHROW(cts_matrix(e, g, 1.0));
    CHECK_NOTHROW(cts_matrix(e, g, 0.0));
}

TEST_CASE("build_ensemble covers the grid in order") {
    SyntheticFeederConfig cfg;
    cfg.meters_per_phase = 4;
    cfg.transformers_per_phase = 2;
    cfg.days = 3;
    cfg.missing_fraction = 0.0;
    cfg.twin_fraction = 0.0;
    cfg.heavy_fraction = 0.0;
    cfg.seed = 9;
    FeederDataset ds = generate_synthetic_feeder(cfg).dataset;

    EnsembleOptions opts;
    opts.correlation.min_pcc_samples = 16;
    Ensemble e = build_ensemble(ds, {0.8, 1.0}, {0.5, 1.0}, 6, opts);
    REQUIRE(e.members.size() == 4);
    CHECK(e.members[0].params.c_threshold_kw == 0.8);
    CHECK(e.members[0].params.t_dur_hours == 0.5);
    CHECK(e.members[1].params.c_threshold_kw == 0.8);
    CHECK(e.members[1].params.t_dur_hours == 1.0);
    CHECK(e.members[3].params.c_threshold_kw == 1.0);
    for (const auto& member : e.members) {
        CHECK(member.partition.k == 6);
        CHECK(member.partition.assignment.size() == 12);
    }

    SUBCASE("single-cell grid gives one member") {
        CHECK(build_ensemble(ds, {1.0}, {0.5}, 6, opts).members.size() == 1);
    }
    SUBCASE("errors name the offending cell") {
        CHECK_THROWS_WITH_AS(build_ensemble(ds, {-1.0}, {0.5}, 6, opts),
                             doctest::Contains("C=-1.0"), ConfigError);
    }
    SUBCASE("grid and target validation") {
        CHECK_THROWS_AS(build_ensemble(ds, {}, {0.5}, 6, opts), ConfigError);
        CHECK_THROWS_AS(build_ensemble(ds, {1.0}, {0.5}, 13, opts), ConfigError);
        CHECK_THROWS_AS(build_ensemble(ds, {1.0}, {0.5}, 0, opts), ConfigError);
    }
}

TEST_CASE("final_partition recovers structure and validates") {
    std::vector<std::uint32_t> part{0, 0, 0, 1, 1, 1, 2, 2, 2};
    Ensemble e = ensemble_of(9, {part, part}, 3);
    SimilarityMatrix s = cts_matrix(e, cluster_graph(e), 0.8);
    Partition final = final_partition(s, 3);
    CHECK(final.k == 3);
    Partition singles = final_partition(s, 9);
    CHECK(singles.k == 9);
    CHECK_THROWS_AS(final_partition(SimilarityMatrix{}, 1), ContractError);
}

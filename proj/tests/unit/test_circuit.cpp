#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phaseid/circuit.hpp"
#include "phaseid/errors.hpp"
#include "phaseid/rng.hpp"

using namespace phaseid;

namespace {

SecondaryCircuit type1(double r_i = 0.05, double r_j = 0.05) {
    return SecondaryCircuit::make(ConnectionType::InParallel, 0.0, r_i, r_j);
}
SecondaryCircuit type2(double r = 0.01, double r_i = 0.05, double r_j = 0.05) {
    return SecondaryCircuit::make(ConnectionType::PartiallyParallel, r, r_i, r_j);
}
SecondaryCircuit type3(double r = 0.01, double r_i = 0.05) {
    return SecondaryCircuit::make(ConnectionType::InSeries, r, r_i, 0.0);
}

void check_sample(const SecondaryCircuit& c, const CircuitSample& s) {
    // KCL is structural; check KVL and the power balance.
    CHECK(s.i_shared == s.i_i + s.i_j);
    CHECK(std::fabs(s.v_i - (s.v_t - s.i_shared * c.r_shared - s.i_i * c.r_i)) < 1e-6);
    CHECK(std::fabs(s.v_j - (s.v_t - s.i_shared * c.r_shared - s.i_j * c.r_j)) < 1e-6);
    CHECK(std::fabs(s.v_i * s.i_i - s.p_i_kw * 1000.0) < 1e-3);
    CHECK(std::fabs(s.v_j * s.i_j - s.p_j_kw * 1000.0) < 1e-3);
}

}  // namespace

TEST_CASE("circuit construction enforces the type rules") {
    CHECK_THROWS_AS(SecondaryCircuit::make(ConnectionType::InParallel, 0.01, 0.05, 0.05),
                    ConfigError);
    CHECK_THROWS_AS(SecondaryCircuit::make(ConnectionType::InSeries, 0.01, 0.05, 0.05),
                    ConfigError);
    CHECK_THROWS_AS(SecondaryCircuit::make(ConnectionType::PartiallyParallel, -0.01, 0.05, 0.05),
                    ConfigError);
    CHECK_NOTHROW(type1());
    CHECK_NOTHROW(type2());
    CHECK_NOTHROW(type3());
}

TEST_CASE("no load means no drop") {
    for (const auto& c : {type1(), type2(), type3()}) {
        CircuitSample s = solve_secondary(c, 120.0, 0.0, 0.0);
        CHECK(s.v_i == 120.0);
        CHECK(s.v_j == 120.0);
        CHECK(s.i_i == 0.0);
        CHECK(s.i_j == 0.0);
        CHECK(s.i_shared == 0.0);
    }
}

TEST_CASE("type 3 with idle load i: load j sees only the shared drop") {
    SecondaryCircuit c = type3(0.02, 0.05);
    CircuitSample s = solve_secondary(c, 120.0, 0.0, 4.0);
    CHECK(s.i_i == 0.0);
    CHECK(s.v_j == doctest::Approx(120.0 - s.i_j * 0.02).epsilon(1e-9));
    // with I_i = 0 the shared node equals both meters' voltage
    CHECK(s.v_i == doctest::Approx(s.v_j).epsilon(1e-9));
    check_sample(c, s);
}

TEST_CASE("symmetric type 1 matches the closed-form quadratic") {
    // V^2 - 120 V + 250 = 0 for R_i = 0.05, P = 5 kW
    SecondaryCircuit c = type1();
    CircuitSample s = solve_secondary(c, 120.0, 5.0, 5.0);
    double root = (120.0 + std::sqrt(120.0 * 120.0 - 4.0 * 0.05 * 5000.0)) / 2.0;
    CHECK(s.v_i == doctest::Approx(root).epsilon(1e-10));
    CHECK(s.v_j == doctest::Approx(root).epsilon(1e-10));
    CHECK(s.v_i == doctest::Approx(117.8791845).epsilon(1e-6));
    check_sample(c, s);
}

TEST_CASE("random operating points satisfy the circuit equations") {
    Rng rng = Rng::stream(99, 0);
    for (int trial = 0; trial < 200; ++trial) {
        SecondaryCircuit c;
        switch (rng.below(3)) {
            case 0: c = type1(rng.uniform(0.01, 0.1), rng.uniform(0.01, 0.1)); break;
            case 1: c = type2(rng.uniform(0.005, 0.02), rng.uniform(0.01, 0.1), rng.uniform(0.01, 0.1)); break;
            default: c = type3(rng.uniform(0.005, 0.02), rng.uniform(0.01, 0.1)); break;
        }
        double v_t = rng.uniform(114.0, 126.0);
        auto s = try_solve_secondary(c, v_t, rng.uniform(0.0, 15.0), rng.uniform(0.0, 15.0));
        REQUIRE(s.has_value());
        check_sample(c, *s);
    }
}

TEST_CASE("infeasible loads are reported, not mis-solved") {
    SecondaryCircuit c = type1(5.0, 0.05);  // discriminant < 0 at 10 kW
    CHECK_FALSE(try_solve_secondary(c, 120.0, 10.0, 0.0).has_value());
    CHECK_THROWS_AS(solve_secondary(c, 120.0, 10.0, 0.0), InfeasibleSampleError);
    CHECK_THROWS_AS(solve_secondary(c, -1.0, 1.0, 1.0), ContractError);
    CHECK_THROWS_AS(solve_secondary(c, 120.0, -1.0, 1.0), ContractError);
}

TEST_CASE("uniform bins partition the range") {
    auto bins = uniform_bins(0.0, 15.0, 5);
    REQUIRE(bins.size() == 5);
    CHECK(bins[0].lo_kw == 0.0);
    CHECK(bins[0].hi_kw == 3.0);
    CHECK(bins[4].hi_kw == 15.0);
    CHECK_THROWS_AS(uniform_bins(0.0, 15.0, 0), ConfigError);
    CHECK_THROWS_AS(uniform_bins(5.0, 5.0, 3), ConfigError);
}

TEST_CASE("monte carlo is deterministic under the seed") {
    MonteCarloOptions opts;
    opts.n_per_bin = 500;
    opts.seed = 7;
    auto bins = uniform_bins(0.0, 15.0, 3);
    MonteCarloResult a = monte_carlo_pcc(type1(), bins, opts);
    MonteCarloResult b = monte_carlo_pcc(type1(), bins, opts);
    CHECK(a.pcc == b.pcc);
    opts.seed = 8;
    MonteCarloResult c = monte_carlo_pcc(type1(), bins, opts);
    CHECK(a.pcc != c.pcc);
}

TEST_CASE("zero band with identical loads is perfectly correlated") {
    MonteCarloOptions opts;
    opts.band_volts = 0.0;
    opts.n_per_bin = 500;
    opts.identical_loads = true;
    MonteCarloResult r = monte_carlo_pcc(type1(), {{1.0, 8.0}}, opts);
    CHECK(r.pcc[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per-bin correlation deteriorates as load rises") {
    MonteCarloOptions opts;
    opts.band_volts = 2.0;
    opts.n_per_bin = 4000;
    opts.seed = 3;
    MonteCarloResult r = monte_carlo_pcc(type1(), uniform_bins(0.0, 15.0, 5), opts);
    for (std::size_t b = 1; b < r.pcc.size(); ++b)
        CHECK(r.pcc[b] <= r.pcc[b - 1] + 0.03);  // allowance for sampling noise
    CHECK(r.pcc.front() > r.pcc.back());
}

TEST_CASE("type 1 deteriorates at least as much as types 2 and 3") {
    MonteCarloOptions opts;
    opts.band_volts = 2.0;
    opts.n_per_bin = 4000;
    opts.seed = 5;
    std::vector<PowerBin> high{{5.0, 15.0}};
    double p1 = monte_carlo_pcc(type1(0.05, 0.05), high, opts).pcc[0];
    double p2 = monte_carlo_pcc(type2(0.01, 0.05, 0.05), high, opts).pcc[0];
    double p3 = monte_carlo_pcc(type3(0.01, 0.05), high, opts).pcc[0];
    CHECK(p1 <= p2 + 0.03);
    CHECK(p1 <= p3 + 0.03);
}

TEST_CASE("excessive infeasible draws raise a config error") {
    MonteCarloOptions opts;
    opts.n_per_bin = 200;
    CHECK_THROWS_AS(monte_carlo_pcc(type1(5.0, 5.0), {{10.0, 15.0}}, opts), ConfigError);
    opts.n_per_bin = 50;
    CHECK_THROWS_AS(monte_carlo_pcc(type1(), {{0.0, 1.0}}, opts), ConfigError);
    CHECK_THROWS_AS(monte_carlo_pcc(type1(), {}, MonteCarloOptions{}), ConfigError);
}

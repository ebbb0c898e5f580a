#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phaseid/dataset.hpp"

namespace phaseid {

// The three ways two single-phase loads hang off one transformer secondary.
enum class ConnectionType : int {
    InParallel = 1,         // no shared conductor: R = 0
    PartiallyParallel = 2,  // shared run, then separate drops
    InSeries = 3,           // load j taps the shared run directly: R_j = 0
};

// Secondary-circuit resistances. Type 1 forces r_shared = 0 and type 3
// forces r_j = 0; violating that (or a negative resistance) is a ConfigError.
struct SecondaryCircuit {
    ConnectionType type = ConnectionType::InParallel;
    double r_shared = 0.0;  // ohms
    double r_i = 0.0;
    double r_j = 0.0;

    static SecondaryCircuit make(ConnectionType type, double r_shared, double r_i, double r_j);
};

// One solved operating point of the two-load constant-power circuit.
struct CircuitSample {
    double v_t = 0.0;     // transformer voltage (V)
    double p_i_kw = 0.0;  // load powers
    double p_j_kw = 0.0;
    double v_i = 0.0;     // solved meter voltages (V)
    double v_j = 0.0;
    double i_i = 0.0;     // solved currents (A)
    double i_j = 0.0;
    double i_shared = 0.0;
};

// Solve V_i = V_T - I R - I_i R_i, V_j = V_T - I R - I_j R_j, I = I_i + I_j
// with constant-power loads V_k I_k = 1000 P_k. Damped fixed point seeded at
// I = P*1000/V_T, Newton fallback, converged when successive voltage
// iterates move less than 1e-9 V. Returns nullopt when the load exceeds
// what the circuit can deliver (no convergence within 200 iterations).
std::optional<CircuitSample> try_solve_secondary(const SecondaryCircuit& circuit, double v_t,
                                                 double p_i_kw, double p_j_kw);

// Throwing wrapper: InfeasibleSampleError instead of nullopt.
CircuitSample solve_secondary(const SecondaryCircuit& circuit, double v_t, double p_i_kw,
                              double p_j_kw);

struct PowerBin {
    double lo_kw = 0.0;
    double hi_kw = 0.0;
};

std::vector<PowerBin> uniform_bins(double lo_kw, double hi_kw, std::size_t count);

struct MonteCarloOptions {
    double band_volts = 0.2;       // V_T ~ Uniform(120 - band/2, 120 + band/2)
    std::size_t n_per_bin = 10000;
    std::uint64_t seed = 1;
    bool identical_loads = false;  // draw p_j = p_i instead of independently
    double max_infeasible_fraction = 0.10;
    double v_nominal = 120.0;
};

struct MonteCarloResult {
    std::vector<PowerBin> bins;
    std::vector<double> pcc;                     // per bin
    std::vector<std::size_t> infeasible_redraws; // per bin
    MonteCarloOptions options;
};

// Per-bin PCC between the two solved meter voltages when both loads are
// drawn uniformly from the bin's sub-range. Draws use counter-based streams
// keyed by (seed, bin, sample), so results are independent of evaluation
// order. Infeasible samples are redrawn and counted; more than
// max_infeasible_fraction redraws in a bin is a ConfigError.
MonteCarloResult monte_carlo_pcc(const SecondaryCircuit& circuit, const std::vector<PowerBin>& bins,
                                 const MonteCarloOptions& options = {});

}  // namespace phaseid

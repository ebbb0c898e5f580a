#include "phaseid/circuit.hpp"

#include <cmath>
#include <string>

#include "phaseid/correlation.hpp"
#include "phaseid/errors.hpp"
#include "phaseid/rng.hpp"

namespace phaseid {

SecondaryCircuit SecondaryCircuit::make(ConnectionType type, double r_shared, double r_i,
                                        double r_j) {
    if (r_shared < 0.0 || r_i < 0.0 || r_j < 0.0)
        throw ConfigError("secondary circuit: resistances must be >= 0");
    if (type == ConnectionType::InParallel && r_shared != 0.0)
        throw ConfigError("secondary circuit: type 1 (in-parallel) requires R = 0");
    if (type == ConnectionType::InSeries && r_j != 0.0)
        throw ConfigError("secondary circuit: type 3 (in-series) requires R_j = 0");
    SecondaryCircuit c;
    c.type = type;
    c.r_shared = r_shared;
    c.r_i = r_i;
    c.r_j = r_j;
    return c;
}

namespace {

constexpr double kVoltTolerance = 1e-9;
constexpr int kMaxIterations = 200;
constexpr int kFixedPointIterations = 60;  // then switch to Newton

struct Residual {
    double f_i, f_j;
};

inline Residual residual(const SecondaryCircuit& c, double v_t, double w_i, double w_j, double v_i,
                         double v_j) {
    double i_i = w_i / v_i;
    double i_j = w_j / v_j;
    double shared = (i_i + i_j) * c.r_shared;
    return {v_i - v_t + shared + i_i * c.r_i, v_j - v_t + shared + i_j * c.r_j};
}

}  // namespace

std::optional<CircuitSample> try_solve_secondary(const SecondaryCircuit& circuit, double v_t,
                                                 double p_i_kw, double p_j_kw) {
    if (v_t <= 0.0) throw ContractError("solve_secondary: v_t must be > 0");
    if (p_i_kw < 0.0 || p_j_kw < 0.0) throw ContractError("solve_secondary: loads must be >= 0");

    const double w_i = p_i_kw * 1000.0;  // watts
    const double w_j = p_j_kw * 1000.0;
    const double v_floor = 0.05 * v_t;

    // Damped fixed point seeded at I = P/V_T; constant-power loads converge
    // quickly while the operating point is on the stable (high-voltage)
    // branch.
    double v_i = v_t - (w_i / v_t + w_j / v_t) * circuit.r_shared - (w_i / v_t) * circuit.r_i;
    double v_j = v_t - (w_i / v_t + w_j / v_t) * circuit.r_shared - (w_j / v_t) * circuit.r_j;
    if (v_i < v_floor || v_j < v_floor) return std::nullopt;

    bool converged = false;
    for (int it = 0; it < kMaxIterations && !converged; ++it) {
        double next_i, next_j;
        if (it < kFixedPointIterations) {
            double i_i = w_i / v_i;
            double i_j = w_j / v_j;
            double shared = (i_i + i_j) * circuit.r_shared;
            next_i = v_t - shared - i_i * circuit.r_i;
            next_j = v_t - shared - i_j * circuit.r_j;
            // Light damping keeps oscillatory iterates contracting.
            next_i = 0.5 * (next_i + v_i);
            next_j = 0.5 * (next_j + v_j);
        } else {
            // Newton on F(v_i, v_j) = 0 with dI/dV = -W/V^2.
            Residual f = residual(circuit, v_t, w_i, w_j, v_i, v_j);
            double di_dvi = -w_i / (v_i * v_i);
            double dj_dvj = -w_j / (v_j * v_j);
            double a11 = 1.0 + circuit.r_shared * di_dvi + circuit.r_i * di_dvi;
            double a12 = circuit.r_shared * dj_dvj;
            double a21 = circuit.r_shared * di_dvi;
            double a22 = 1.0 + circuit.r_shared * dj_dvj + circuit.r_j * dj_dvj;
            double det = a11 * a22 - a12 * a21;
            if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
            next_i = v_i - (f.f_i * a22 - f.f_j * a12) / det;
            next_j = v_j - (f.f_j * a11 - f.f_i * a21) / det;
        }
        if (!std::isfinite(next_i) || !std::isfinite(next_j) || next_i < v_floor ||
            next_j < v_floor)
            return std::nullopt;
        converged = std::fabs(next_i - v_i) < kVoltTolerance && std::fabs(next_j - v_j) < kVoltTolerance;
        v_i = next_i;
        v_j = next_j;
    }
    if (!converged) return std::nullopt;

    CircuitSample s;
    s.v_t = v_t;
    s.p_i_kw = p_i_kw;
    s.p_j_kw = p_j_kw;
    s.v_i = v_i;
    s.v_j = v_j;
    s.i_i = w_i / v_i;
    s.i_j = w_j / v_j;
    s.i_shared = s.i_i + s.i_j;
    return s;
}

CircuitSample solve_secondary(const SecondaryCircuit& circuit, double v_t, double p_i_kw,
                              double p_j_kw) {
    auto s = try_solve_secondary(circuit, v_t, p_i_kw, p_j_kw);
    if (!s)
        throw InfeasibleSampleError("secondary circuit cannot deliver P_i=" +
                                    std::to_string(p_i_kw) + " kW, P_j=" + std::to_string(p_j_kw) +
                                    " kW at V_T=" + std::to_string(v_t) + " V");
    return *s;
}

std::vector<PowerBin> uniform_bins(double lo_kw, double hi_kw, std::size_t count) {
    if (count == 0 || hi_kw <= lo_kw) throw ConfigError("uniform_bins: bad bin layout");
    std::vector<PowerBin> bins(count);
    double width = (hi_kw - lo_kw) / static_cast<double>(count);
    for (std::size_t b = 0; b < count; ++b)
        bins[b] = {lo_kw + width * static_cast<double>(b),
                   lo_kw + width * static_cast<double>(b + 1)};
    return bins;
}

MonteCarloResult monte_carlo_pcc(const SecondaryCircuit& circuit, const std::vector<PowerBin>& bins,
                                 const MonteCarloOptions& options) {
    if (bins.empty()) throw ConfigError("monte_carlo_pcc: no bins");
    if (options.n_per_bin < 100) throw ConfigError("monte_carlo_pcc: need >= 100 samples per bin");
    if (options.band_volts < 0.0) throw ConfigError("monte_carlo_pcc: band must be >= 0");

    MonteCarloResult result;
    result.bins = bins;
    result.options = options;
    result.pcc.resize(bins.size());
    result.infeasible_redraws.resize(bins.size());

    const double v_lo = options.v_nominal - options.band_volts / 2.0;
    const double v_hi = options.v_nominal + options.band_volts / 2.0;
    const std::size_t max_redraws =
        static_cast<std::size_t>(options.max_infeasible_fraction * options.n_per_bin) + 1;

    std::vector<double> vi(options.n_per_bin), vj(options.n_per_bin);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        std::size_t redraws = 0;
        for (std::size_t s = 0; s < options.n_per_bin; ++s) {
            // One independent stream per (seed, bin, sample): draw order and
            // threading cannot change the result.
            Rng rng = Rng::stream(options.seed, b, s);
            std::optional<CircuitSample> sample;
            while (!sample) {
                double v_t = rng.uniform(v_lo, v_hi);
                double p_i = rng.uniform(bins[b].lo_kw, bins[b].hi_kw);
                double p_j = options.identical_loads ? p_i : rng.uniform(bins[b].lo_kw, bins[b].hi_kw);
                sample = try_solve_secondary(circuit, v_t, p_i, p_j);
                if (!sample && ++redraws > max_redraws)
                    throw ConfigError(
                        "monte_carlo_pcc: more than " +
                        std::to_string(100.0 * options.max_infeasible_fraction) +
                        "% infeasible samples in bin [" + std::to_string(bins[b].lo_kw) + "," +
                        std::to_string(bins[b].hi_kw) + "] kW; loads exceed the circuit's range");
            }
            vi[s] = sample->v_i;
            vj[s] = sample->v_j;
        }
        result.infeasible_redraws[b] = redraws;
        result.pcc[b] = pcc(vi, vj);
    }
    return result;
}

}  // namespace phaseid

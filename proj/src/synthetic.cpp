#include "phaseid/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "phaseid/circuit.hpp"
#include "phaseid/errors.hpp"
#include "phaseid/rng.hpp"

namespace phaseid {

namespace {

// Mean-reverting (AR-1) process with a given stationary sigma and time
// constant, stepped on the substep grid.
struct Ar1 {
    double rho = 0.0;
    double innovation = 0.0;
    double value = 0.0;

    Ar1(double sigma_stat, double tau_hours, double dt_minutes, Rng& rng) {
        if (sigma_stat <= 0.0 || tau_hours <= 0.0) {
            rho = 1.0;
            innovation = 0.0;
            value = 0.0;
            return;
        }
        rho = std::exp(-dt_minutes / (tau_hours * 60.0));
        innovation = sigma_stat * std::sqrt(1.0 - rho * rho);
        value = sigma_stat * rng.normal();
    }

    double step(Rng& rng) {
        value = rho * value + innovation * rng.normal();
        return value;
    }
};

// Smooth 0..1 daily shape: 0 at 06:00, peaking at 18:00.
double diurnal_shape(double hour_of_day) {
    return 0.5 * (1.0 - std::cos(2.0 * 3.141592653589793 * (hour_of_day - 6.0) / 24.0));
}

struct MeterWiring {
    std::size_t transformer = 0;  // global transformer index
    std::size_t pair_slot = 0;    // 0 = load i, 1 = load j
    std::size_t pair_index = 0;   // global pair index
};

}  // namespace

SyntheticFeeder generate_synthetic_feeder(const SyntheticFeederConfig& config) {
    if (config.meters_per_phase < 1) throw ConfigError("synthetic feeder: need meters");
    if (config.transformers_per_phase < 1) throw ConfigError("synthetic feeder: need transformers");
    if (config.meters_per_phase < config.transformers_per_phase)
        throw ConfigError("synthetic feeder: fewer meters than transformers per phase");
    if (config.days < 1) throw ConfigError("synthetic feeder: need at least one day");
    if (config.delta_t_minutes <= 0.0) throw ConfigError("synthetic feeder: bad sampling interval");
    if (config.substeps_per_sample < 1) throw ConfigError("synthetic feeder: bad substep count");
    if (config.missing_fraction < 0.0 || config.missing_fraction >= 1.0)
        throw ConfigError("synthetic feeder: missing fraction must be in [0,1)");
    double samples_per_day = 24.0 * 60.0 / config.delta_t_minutes;
    if (samples_per_day != std::floor(samples_per_day))
        throw ConfigError("synthetic feeder: sampling interval must divide the day");

    const std::size_t n_samples = static_cast<std::size_t>(samples_per_day) * config.days;
    const std::size_t substeps = static_cast<std::size_t>(config.substeps_per_sample);
    const std::size_t n_sub = n_samples * substeps;
    const double dt_sub_min = config.delta_t_minutes / static_cast<double>(substeps);
    const std::size_t mpp = config.meters_per_phase;
    const std::size_t tpp = config.transformers_per_phase;
    const std::size_t n_meters = 3 * mpp;
    const std::size_t n_transformers = 3 * tpp;

    // --- wiring: meters interleave phases; within a phase they go round
    // robin over the phase's transformers; per transformer, arrivals pair up.
    std::vector<Phase> meter_phase(n_meters);
    std::vector<std::size_t> meter_transformer(n_meters);
    std::vector<std::vector<std::size_t>> transformer_meters(n_transformers);
    for (std::size_t m = 0; m < n_meters; ++m) {
        std::size_t p = m % 3;
        std::size_t q = m / 3;  // index within the phase
        std::size_t tr = p * tpp + (q % tpp);
        meter_phase[m] = static_cast<Phase>(p);
        meter_transformer[m] = tr;
        transformer_meters[tr].push_back(m);
    }

    struct PairCircuit {
        SecondaryCircuit circuit;
        std::size_t transformer;
        std::size_t meter_i;
        long meter_j;  // -1 = solo meter
    };
    std::vector<PairCircuit> pairs;
    for (std::size_t tr = 0; tr < n_transformers; ++tr) {
        const auto& ms = transformer_meters[tr];
        for (std::size_t a = 0; a < ms.size(); a += 2) {
            Rng rng = Rng::stream(config.seed, 5, pairs.size());
            auto type = static_cast<ConnectionType>(1 + static_cast<int>(rng.below(3)));
            double r_i = rng.uniform(config.r_branch_min, config.r_branch_max);
            double r_j = rng.uniform(config.r_branch_min, config.r_branch_max);
            double r_shared = type == ConnectionType::InParallel ? 0.0 : config.r_shared;
            if (type == ConnectionType::InSeries) r_j = 0.0;
            PairCircuit pc;
            pc.circuit = SecondaryCircuit::make(type, r_shared, r_i, r_j);
            pc.transformer = tr;
            pc.meter_i = ms[a];
            pc.meter_j = a + 1 < ms.size() ? static_cast<long>(ms[a + 1]) : -1;
            pairs.push_back(pc);
        }
    }

    // --- substep voltage processes.
    std::vector<double> hour_of_day(n_sub);
    for (std::size_t t = 0; t < n_sub; ++t)
        hour_of_day[t] = std::fmod(static_cast<double>(t) * dt_sub_min / 60.0, 24.0);

    std::vector<double> transformer_v(n_transformers * n_sub);
    {
        Rng sys_rng = Rng::stream(config.seed, 1, 0);
        Ar1 sys(config.system_sigma_v, config.system_tau_hours, dt_sub_min, sys_rng);
        std::vector<double> sys_v(n_sub);
        for (std::size_t t = 0; t < n_sub; ++t) sys_v[t] = sys.step(sys_rng);

        for (std::size_t p = 0; p < 3; ++p) {
            Rng phase_rng = Rng::stream(config.seed, 2, p);
            double amp = config.diurnal_amp_v * (0.9 + 0.2 * phase_rng.uniform());
            Ar1 ph(config.phase_sigma_v, config.phase_tau_hours, dt_sub_min, phase_rng);
            std::vector<double> phase_v(n_sub);
            for (std::size_t t = 0; t < n_sub; ++t)
                phase_v[t] = sys_v[t] + ph.step(phase_rng) - amp * diurnal_shape(hour_of_day[t]);

            for (std::size_t k = 0; k < tpp; ++k) {
                std::size_t tr = p * tpp + k;
                Rng tr_rng = Rng::stream(config.seed, 3, tr);
                Ar1 local(config.transformer_sigma_v, config.transformer_tau_hours, dt_sub_min,
                          tr_rng);
                double* out = &transformer_v[tr * n_sub];
                for (std::size_t t = 0; t < n_sub; ++t)
                    out[t] = config.v_base + phase_v[t] + local.step(tr_rng);
            }
        }
    }

    // --- substep load profiles: diurnal base plus on/off spikes whose
    // durations are drawn in minutes, so spike edges usually land inside a
    // reported sample.
    std::vector<double> load(n_meters * n_sub);
    std::vector<bool> heavy(n_meters, false);
    for (std::size_t m = 0; m < n_meters; ++m) {
        Rng pick = Rng::stream(config.seed, 7, m);
        heavy[m] = pick.uniform() < config.heavy_fraction;
    }

    // Twin pairs: meter c of phase p with meter c of phase (p+1)%3. Twins
    // are never heavy, so the two confusion mechanisms stay distinct.
    std::vector<long> twin_pair(n_meters, -1);  // pair index, -1 = untwinned
    std::size_t n_twin_pairs =
        static_cast<std::size_t>(config.twin_fraction * static_cast<double>(n_meters) / 2.0);
    n_twin_pairs = std::min(n_twin_pairs, mpp / 2);
    for (std::size_t c = 0; c < n_twin_pairs; ++c) {
        std::size_t p = c % 3;
        std::size_t i = (2 * c) * 3 + p;            // phase p, within-phase index 2c
        std::size_t j = (2 * c + 1) * 3 + (p + 1) % 3;  // next phase, index 2c+1
        twin_pair[i] = twin_pair[j] = static_cast<long>(c);
        heavy[i] = heavy[j] = false;
    }

    // Shared twin spike schedules at substep resolution.
    std::vector<double> twin_spike(n_twin_pairs * n_sub, 0.0);
    for (std::size_t c = 0; c < n_twin_pairs; ++c) {
        Rng rng = Rng::stream(config.seed, 8, c);
        std::size_t spike_left = 0;
        double spike_kw = 0.0;
        double* out = &twin_spike[c * n_sub];
        for (std::size_t t = 0; t < n_sub; ++t) {
            double h = hour_of_day[t];
            if (spike_left > 0) {
                --spike_left;
            } else {
                double rate = h < 6.0 ? config.twin_night_rate_per_hour
                                      : config.twin_day_rate_per_hour * (0.3 + 1.4 * diurnal_shape(h));
                if (rng.uniform() < rate * dt_sub_min / 60.0) {
                    double minutes = rng.uniform(config.twin_min_minutes, config.twin_max_minutes);
                    spike_left = static_cast<std::size_t>(std::ceil(minutes / dt_sub_min));
                    spike_kw = rng.uniform(config.twin_spike_min_kw, config.twin_spike_max_kw);
                }
            }
            out[t] = spike_left > 0 ? spike_kw : 0.0;
        }
    }

    for (std::size_t m = 0; m < n_meters; ++m) {
        Rng rng = Rng::stream(config.seed, 4, m);
        double level;
        if (twin_pair[m] >= 0) {
            level = twin_pair[m] % 2 == 0
                        ? rng.uniform(config.twin_base_min_kw, config.twin_base_max_kw)
                        : rng.uniform(config.twin_high_base_min_kw, config.twin_high_base_max_kw);
        } else {
            level = rng.uniform(config.base_load_min_kw, config.base_load_max_kw);
        }
        Ar1 wiggle(0.15, 1.5, dt_sub_min, rng);
        double day_rate = heavy[m] ? config.heavy_day_rate_per_hour : config.day_spike_rate_per_hour;
        double night_rate =
            heavy[m] ? config.heavy_night_rate_per_hour : config.night_spike_rate_per_hour;
        double spike_lo = heavy[m] ? config.heavy_spike_min_kw : config.spike_min_kw;
        double spike_hi = heavy[m] ? config.heavy_spike_max_kw : config.spike_max_kw;
        double duration_scale = heavy[m] ? config.heavy_duration_scale : 1.0;
        double twin_amp = 1.0 + config.twin_amp_jitter * (rng.uniform() - 0.5);
        const double* shared =
            twin_pair[m] >= 0 ? &twin_spike[static_cast<std::size_t>(twin_pair[m]) * n_sub]
                              : nullptr;
        std::size_t spike_left = 0;
        double spike_kw = 0.0;
        double* out = &load[m * n_sub];
        for (std::size_t t = 0; t < n_sub; ++t) {
            double h = hour_of_day[t];
            double base = level * (0.8 + 0.4 * diurnal_shape(h)) * (1.0 + wiggle.step(rng));
            base = level > 0.0 ? std::max(base, 0.02) : 0.0;
            if (spike_left > 0) {
                --spike_left;
            } else {
                // Evening-peaked start rate: spikes coincide across meters.
                double rate = h < 6.0 ? night_rate : day_rate * (0.3 + 1.4 * diurnal_shape(h));
                if (rng.uniform() < rate * dt_sub_min / 60.0) {
                    double minutes = duration_scale *
                                     rng.uniform(config.spike_min_minutes, config.spike_max_minutes);
                    spike_left = static_cast<std::size_t>(std::ceil(minutes / dt_sub_min));
                    spike_kw = rng.uniform(spike_lo, spike_hi);
                }
            }
            double p = base;
            if (shared)
                p += twin_amp * shared[t];  // twins: the shared plant is the big load
            else if (spike_left > 0)
                p += spike_kw;
            out[t] = p;
        }
    }

    // --- solve every secondary pair at every substep.
    std::vector<double> meter_v(n_meters * n_sub);
    for (const auto& pc : pairs) {
        const double* vt = &transformer_v[pc.transformer * n_sub];
        const double* pi = &load[pc.meter_i * n_sub];
        const double* pj = pc.meter_j >= 0 ? &load[static_cast<std::size_t>(pc.meter_j) * n_sub]
                                           : nullptr;
        double* vi = &meter_v[pc.meter_i * n_sub];
        double* vj = pc.meter_j >= 0 ? &meter_v[static_cast<std::size_t>(pc.meter_j) * n_sub]
                                     : nullptr;
        for (std::size_t t = 0; t < n_sub; ++t) {
            auto sample = try_solve_secondary(pc.circuit, vt[t], pi[t], pj ? pj[t] : 0.0);
            if (!sample)
                throw ConfigError("synthetic feeder: infeasible load at substep " +
                                  std::to_string(t) + "; lower the spike amplitudes");
            vi[t] = sample->v_i;
            if (vj) vj[t] = sample->v_j;
        }
    }

    // --- aggregate substeps into reported samples and inject missing bursts.
    SyntheticFeeder feeder;
    feeder.dataset.delta_t_minutes = config.delta_t_minutes;
    feeder.dataset.timestamps.reserve(n_samples);
    std::int64_t step_s = static_cast<std::int64_t>(config.delta_t_minutes * 60.0);
    for (std::size_t t = 0; t < n_samples; ++t)
        feeder.dataset.timestamps.push_back(config.start_epoch + static_cast<std::int64_t>(t) * step_s);

    feeder.dataset.meters.resize(n_meters);
    feeder.truth.meter_ids.resize(n_meters);
    feeder.truth.phase = meter_phase;
    feeder.truth.transformer_ids.resize(n_meters);

    const double missing_f = config.missing_fraction;
    const double burst_mean = std::max(1.0, config.missing_burst_mean_samples);
    const double start_p = missing_f > 0.0 ? missing_f / (burst_mean * (1.0 - missing_f)) : 0.0;

    for (std::size_t m = 0; m < n_meters; ++m) {
        auto& meter = feeder.dataset.meters[m];
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "M%04zu", m + 1);
        meter.meter_id = idbuf;
        feeder.truth.meter_ids[m] = idbuf;
        char trbuf[32];
        std::snprintf(trbuf, sizeof(trbuf), "T%03zu", meter_transformer[m] + 1);
        feeder.truth.transformer_ids[m] = trbuf;

        meter.recorded_phase = meter_phase[m];
        bool at_240 = config.service_240_every > 0 && (m % config.service_240_every == 0);
        meter.service_voltage = at_240 ? 240.0 : 120.0;
        double scale = at_240 ? 2.0 : 1.0;

        meter.power_kw.resize(n_samples);
        meter.voltage.resize(n_samples);
        const double* lp = &load[m * n_sub];
        const double* lv = &meter_v[m * n_sub];
        for (std::size_t t = 0; t < n_samples; ++t) {
            double pk = 0.0;
            for (std::size_t s = 0; s < substeps; ++s) pk += lp[t * substeps + s];
            meter.power_kw[t] = pk / static_cast<double>(substeps);
            if (config.voltage_endpoint_read) {
                // Register read at the closing boundary, i.e. the first
                // instant of the next interval.
                std::size_t read_at = std::min((t + 1) * substeps, n_sub - 1);
                meter.voltage[t] = scale * lv[read_at];
            } else {
                double vv = 0.0;
                for (std::size_t s = 0; s < substeps; ++s) vv += lv[t * substeps + s];
                meter.voltage[t] = scale * vv / static_cast<double>(substeps);
            }
        }

        if (start_p > 0.0) {
            Rng rng = Rng::stream(config.seed, 6, m);
            std::size_t t = 0;
            while (t < n_samples) {
                if (rng.uniform() < start_p) {
                    double u = rng.uniform();
                    std::size_t len = 1 + static_cast<std::size_t>(
                        std::floor(std::log(1.0 - u) / std::log(1.0 - 1.0 / burst_mean)));
                    for (std::size_t g = 0; g < len && t + g < n_samples; ++g) {
                        meter.power_kw[t + g] = missing_value();
                        meter.voltage[t + g] = missing_value();
                    }
                    t += len;
                } else {
                    ++t;
                }
            }
        }
    }
    return feeder;
}

void write_truth_csv(const SyntheticTruth& truth, const std::string& path,
                     const std::string& artifact_header) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write truth CSV: " + path);
    if (!artifact_header.empty()) out << artifact_header << "\n";
    out << "meter_id,phase,transformer_id\n";
    for (std::size_t m = 0; m < truth.meter_ids.size(); ++m)
        out << truth.meter_ids[m] << ',' << phase_char(truth.phase[m]) << ','
            << truth.transformer_ids[m] << "\n";
}

}  // namespace phaseid

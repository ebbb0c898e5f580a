#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phaseid/dataset.hpp"

namespace phaseid {

// Ground-truth synthetic feeder generator. Three independent smooth phase
// voltage processes share a system-wide component; transformers add a small
// local component; meter voltages come from solving the secondary circuit
// against per-meter load profiles (diurnal base plus random spikes).
// Everything is keyed off the seed, so a config reproduces bit-exactly.
struct SyntheticFeederConfig {
    std::size_t meters_per_phase = 30;
    std::size_t transformers_per_phase = 15;
    std::size_t days = 30;
    double delta_t_minutes = 15.0;
    // Loads and voltages are simulated on a finer grid and averaged into
    // each reported sample, the way interval meters do; spike edges landing
    // inside a sample produce the low-kW / disturbed-voltage readings that
    // the minimum-duration criterion exists to filter.
    int substeps_per_sample = 3;
    std::int64_t start_epoch = 1672531200;  // 2023-01-01T00:00:00

    // Phase voltage model (volts at the 120 V base).
    double v_base = 120.0;
    double system_sigma_v = 0.35;
    double system_tau_hours = 4.0;
    double phase_sigma_v = 0.35;
    double phase_tau_hours = 2.0;
    double transformer_sigma_v = 0.06;
    double transformer_tau_hours = 1.0;
    double diurnal_amp_v = 0.3;

    // Load model (kW). Daytime spike starts follow the diurnal shape, so
    // spikes coincide across meters in the evening the way real appliance
    // load does; that coincidence is what degrades full-data correlation.
    double base_load_min_kw = 0.42;
    double base_load_max_kw = 0.62;
    double spike_min_kw = 2.0;
    double spike_max_kw = 7.0;
    double day_spike_rate_per_hour = 0.85;    // 06:00-24:00, modulated by shape
    double night_spike_rate_per_hour = 0.05;  // 00:00-06:00
    double spike_min_minutes = 10.0;
    double spike_max_minutes = 120.0;

    // Heavy consumers: a fraction of meters whose large, frequently cycling
    // loads leave few low-power windows. These are the meters plain
    // full-data correlation tends to misplace.
    double heavy_fraction = 0.15;
    double heavy_spike_min_kw = 3.0;
    double heavy_spike_max_kw = 9.0;
    double heavy_day_rate_per_hour = 1.4;
    double heavy_night_rate_per_hour = 0.45;
    double heavy_duration_scale = 2.0;

    // Cross-phase twin loads: pairs of meters on different phases that share
    // one spike schedule (timed appliances, building plant). While the
    // shared load runs, their voltage dips track each other and full-data
    // correlation pulls the pair together across phases; only low-power
    // segments recover the phase signature.
    double twin_fraction = 0.12;  // fraction of meters in twin pairs
    double twin_amp_jitter = 0.15;
    double twin_spike_min_kw = 4.0;
    double twin_spike_max_kw = 9.0;
    double twin_day_rate_per_hour = 1.6;
    double twin_night_rate_per_hour = 0.22;
    // Twin base loads split into two populations: low-idle sites whose
    // short off-gaps surface as boundary-polluted fragments, and high-idle
    // sites that starve the low-C cells into the all-data fallback.
    double twin_base_min_kw = 0.22;
    double twin_base_max_kw = 0.38;
    double twin_high_base_min_kw = 0.55;
    double twin_high_base_max_kw = 0.68;
    double twin_min_minutes = 60.0;
    double twin_max_minutes = 240.0;

    // Secondary circuit draws.
    double r_shared = 0.01;
    double r_branch_min = 0.03;
    double r_branch_max = 0.07;

    // Interval meters integrate kW over the reporting interval but log the
    // voltage register as an instantaneous read at the interval boundary.
    // A load stepping in the last substeps of an interval therefore shows a
    // low average kW with a fully disturbed voltage -- the boundary samples
    // that make unsustained low-power runs untrustworthy.
    bool voltage_endpoint_read = true;

    // Data quality: missing data arrives in short bursts (whole samples) at
    // the configured overall fraction.
    double missing_fraction = 0.0857;
    double missing_burst_mean_samples = 3.0;

    // Every n-th meter is emitted at 240 V service (voltage scaled, p.u.
    // identical after normalization); 0 disables.
    std::size_t service_240_every = 3;

    std::uint64_t seed = 1;
};

struct SyntheticTruth {
    std::vector<std::string> meter_ids;
    std::vector<Phase> phase;
    std::vector<std::string> transformer_ids;
};

struct SyntheticFeeder {
    FeederDataset dataset;  // voltages in volts, recorded_phase filled in
    SyntheticTruth truth;
};

SyntheticFeeder generate_synthetic_feeder(const SyntheticFeederConfig& config);

void write_truth_csv(const SyntheticTruth& truth, const std::string& path,
                     const std::string& artifact_header = "");

}  // namespace phaseid

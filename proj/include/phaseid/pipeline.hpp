#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phaseid/circuit.hpp"
#include "phaseid/clustering.hpp"
#include "phaseid/correlation.hpp"
#include "phaseid/ensemble.hpp"
#include "phaseid/ingest.hpp"
#include "phaseid/labeling.hpp"
#include "phaseid/synthetic.hpp"

namespace phaseid {

extern const char* const kToolVersion;

// Orchestration layer shared by the CLI and the Python bindings: each run_*
// function is one subcommand minus the flag parsing. Every run writes its
// artifacts (when out_dir is set) and returns the results for callers.

struct CommonConfig {
    std::string input;        // data CSV
    std::string schema_file;  // optional key=value column mapping
    std::string out_dir;      // empty = compute only, write nothing
    std::string cache_dir;
    unsigned workers = 1;
    double max_missing = 0.80;
    std::size_t min_pcc_samples = 96;
    Linkage linkage = Linkage::Average;
};

// Load -> drop sparse meters -> normalize, i.e. the front of every pipeline.
struct PreparedData {
    FeederDataset dataset;  // normalized
    std::vector<std::string> dropped_meters;
    std::size_t outlier_count = 0;
};
PreparedData prepare_dataset(const CommonConfig& common);

struct IdentifyConfig {
    CommonConfig common;
    double c_threshold_kw = 1.0;
    double t_dur_hours = 0.5;
    std::size_t k = 0;      // fixed cut; 0 = sweep k = 3..3*n_max and keep the best
    std::size_t n_max = 0;  // 0 = up to 12, capped by the meter count
    std::string labels_file;       // overrides recorded phases from the CSV
    std::string corrections_file;  // field-verified label overrides
    bool dump_segments = false;
    bool dump_distance = false;    // write the correlation-distance matrix CSV
};

struct IdentifyResult {
    std::size_t k = 0;
    Partition partition;
    PhaseAssignment assignment;
    AccuracyReport report;
    std::vector<std::string> meter_ids;
    std::vector<Phase> truth;
};

IdentifyResult run_identify(const IdentifyConfig& config);

struct SweepConfig {
    CommonConfig common;
    std::vector<double> c_grid_kw;        // empty = 0..2.0 step 0.1
    std::vector<double> t_dur_grid_hours; // empty = 0..3.0 step 0.5
    std::size_t n_max = 0;  // 0 = up to 12, capped by the meter count
    std::string labels_file;
    std::string corrections_file;
};

struct SweepCell {
    double c_threshold_kw = 0.0;
    double t_dur_hours = 0.0;
    std::size_t k = 0;
    double accuracy = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;  // C-major, then T_dur, then k
    SweepCell best;                // first cell reaching the maximum accuracy
};

SweepResult run_sweep(const SweepConfig& config);

struct EnsembleConfig {
    CommonConfig common;
    std::vector<double> c_grid_kw;         // default 1.2..1.6 step 0.1
    std::vector<double> t_dur_grid_hours;  // default {2.0, 2.5}
    std::size_t target_clusters = 0;       // 0 = default_target_clusters(N)
    double decay = 0.8;
    std::string truth_file;  // optional: score the final clusters
};

struct EnsembleResult {
    Ensemble ensemble;
    SimilarityMatrix similarity;
    Partition partition;
    std::optional<AccuracyReport> report;  // when truth was supplied
    std::vector<std::string> meter_ids;
};

EnsembleResult run_ensemble(const EnsembleConfig& config);

struct SimulateConfig {
    SyntheticFeederConfig feeder;
    std::string out_dir;
    bool run_monte_carlo = true;
    std::size_t mc_samples_per_bin = 10000;
    std::size_t mc_bins = 15;
    std::vector<double> mc_bands_volts = {0.2, 0.5, 1.0, 2.0, 5.0};
};

void run_simulate(const SimulateConfig& config);

struct EvaluateConfig {
    std::string predictions_file;  // assignment CSV from identify/ensemble
    std::string truth_file;
    std::string out_dir;
};

AccuracyReport run_evaluate(const EvaluateConfig& config);

// Assignment CSV shared by identify/ensemble/evaluate.
void write_assignment_csv(const std::string& path, const std::vector<std::string>& meter_ids,
                          const Partition& partition, const PhaseAssignment* assignment,
                          const std::vector<Phase>* recorded, const std::string& artifact_header);

// First line of every artifact: "# phaseid <version> config=<hash>".
std::string artifact_header(const std::string& config_text);

}  // namespace phaseid

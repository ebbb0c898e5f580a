#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phaseid/errors.hpp"
#include "phaseid/pipeline.hpp"

namespace {

using namespace phaseid;

std::vector<double> range_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    if (step <= 0.0) throw ConfigError("grid step must be > 0");
    // Round to the step lattice so 0.1 increments land on clean values.
    long n = static_cast<long>((hi - lo) / step + 1.5);
    for (long i = 0; i < n; ++i) {
        double v = lo + step * static_cast<double>(i);
        if (v > hi + 1e-9) break;
        grid.push_back(std::round(v * 1e9) / 1e9);  // keep 0.1 steps printable
    }
    if (grid.empty()) throw ConfigError("empty parameter grid");
    return grid;
}

void add_common_flags(CLI::App* cmd, CommonConfig& common, bool requires_input = true) {
    const char* env_workers = std::getenv("PHASEID_WORKERS");
    const char* env_cache = std::getenv("PHASEID_CACHE_DIR");
    if (env_workers) common.workers = static_cast<unsigned>(std::atoi(env_workers));
    if (env_cache) common.cache_dir = env_cache;

    auto* input = cmd->add_option("-i,--input", common.input, "input meter CSV");
    if (requires_input) input->required();
    cmd->add_option("--schema", common.schema_file, "key=value column-mapping config");
    cmd->add_option("-o,--out", common.out_dir, "output directory for artifacts");
    cmd->add_option("--cache-dir", common.cache_dir,
                    "distance-matrix cache directory (env PHASEID_CACHE_DIR)");
    cmd->add_option("--workers", common.workers,
                    "worker threads, 0 = hardware (env PHASEID_WORKERS)");
    cmd->add_option("--max-missing", common.max_missing,
                    "drop meters with a higher missing-data fraction");
    cmd->add_option("--min-pcc-samples", common.min_pcc_samples,
                    "segment points required before the all-data fallback");
    std::string linkage = "average";
    cmd->add_option_function<std::string>(
           "--linkage", [&common](const std::string& v) { common.linkage = linkage_from_string(v); },
           "linkage rule: average, complete or single")
        ->default_str("average");
}

int dispatch(CLI::App& app, int argc, char** argv) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phaseid: smart-meter phase identification from voltage correlation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("phaseid ") + kToolVersion);

    // --- simulate
    SimulateConfig sim;
    auto* simulate = app.add_subcommand("simulate", "generate a ground-truth synthetic feeder");
    simulate->add_option("-o,--out", sim.out_dir, "output directory")->required();
    simulate->add_option("--meters-per-phase", sim.feeder.meters_per_phase);
    simulate->add_option("--transformers-per-phase", sim.feeder.transformers_per_phase);
    simulate->add_option("--days", sim.feeder.days);
    simulate->add_option("--delta-t", sim.feeder.delta_t_minutes, "sampling interval (minutes)");
    simulate->add_option("--seed", sim.feeder.seed);
    simulate->add_option("--missing", sim.feeder.missing_fraction, "missing-data fraction");
    simulate->add_option("--base-min", sim.feeder.base_load_min_kw);
    simulate->add_option("--base-max", sim.feeder.base_load_max_kw);
    simulate->add_option("--spike-min", sim.feeder.spike_min_kw);
    simulate->add_option("--spike-max", sim.feeder.spike_max_kw);
    simulate->add_option("--day-rate", sim.feeder.day_spike_rate_per_hour,
                         "daytime spike starts per hour");
    simulate->add_option("--night-rate", sim.feeder.night_spike_rate_per_hour);
    bool no_mc = false;
    simulate->add_flag("--no-mc", no_mc, "skip the Monte Carlo correlation study");
    simulate->add_option("--mc-samples", sim.mc_samples_per_bin, "Monte Carlo samples per bin");
    simulate->add_option("--mc-bins", sim.mc_bins, "load-level bins over [0,15] kW");

    // --- identify
    IdentifyConfig ident;
    auto* identify =
        app.add_subcommand("identify", "segmented-correlation clustering with majority-vote labels");
    add_common_flags(identify, ident.common);
    identify->add_option("--c", ident.c_threshold_kw, "power threshold C (kW)");
    identify->add_option("--t-dur", ident.t_dur_hours, "minimum duration T_dur (hours)");
    identify->add_option("--k", ident.k, "fixed cluster count (default: sweep 3..3*n-max)");
    identify->add_option("--n-max", ident.n_max, "sweep cluster counts 3,6,..,3*n_max");
    identify->add_option("--labels", ident.labels_file, "phase labels CSV (meter_id,phase)");
    identify->add_option("--corrections", ident.corrections_file,
                         "field-verified label overrides (meter_id,phase)");
    identify->add_flag("--dump-segments", ident.dump_segments,
                       "write per-pair segment diagnostics JSON");
    identify->add_flag("--dump-distance", ident.dump_distance,
                       "write the correlation-distance matrix CSV");

    // --- sweep
    SweepConfig sweep;
    double c_min = 0.0, c_max = 2.0, c_step = 0.1;
    double t_min = 0.0, t_max = 3.0, t_step = 0.5;
    auto* sweep_cmd = app.add_subcommand("sweep", "accuracy grid over (C, T_dur, k)");
    add_common_flags(sweep_cmd, sweep.common);
    sweep_cmd->add_option("--c-min", c_min);
    sweep_cmd->add_option("--c-max", c_max);
    sweep_cmd->add_option("--c-step", c_step);
    sweep_cmd->add_option("--t-min", t_min);
    sweep_cmd->add_option("--t-max", t_max);
    sweep_cmd->add_option("--t-step", t_step);
    sweep_cmd->add_option("--n-max", sweep.n_max);
    sweep_cmd->add_option("--labels", sweep.labels_file);
    sweep_cmd->add_option("--corrections", sweep.corrections_file);

    // --- ensemble
    EnsembleConfig ens;
    auto* ensemble =
        app.add_subcommand("ensemble", "CTS ensemble clustering for unlabeled feeders");
    add_common_flags(ensemble, ens.common);
    ensemble->add_option("--c-grid", ens.c_grid_kw, "C values (kW)")->delimiter(',');
    ensemble->add_option("--t-grid", ens.t_dur_grid_hours, "T_dur values (hours)")->delimiter(',');
    ensemble->add_option("--target-clusters", ens.target_clusters,
                         "3n*, 0 = pick from the meter count");
    ensemble->add_option("--dc", ens.decay, "CTS decay factor in [0,1]");
    ensemble->add_option("--truth", ens.truth_file, "score the final clusters against this truth");

    // --- evaluate
    EvaluateConfig eval;
    auto* evaluate = app.add_subcommand("evaluate", "score a predictions CSV against truth");
    evaluate->add_option("--pred", eval.predictions_file, "assignment/clusters CSV")->required();
    evaluate->add_option("--truth", eval.truth_file, "truth CSV (meter_id,phase)")->required();
    evaluate->add_option("-o,--out", eval.out_dir, "output directory");

    int parse_rc = dispatch(app, argc, argv);
    if (parse_rc != 0 || app.get_subcommands().empty()) return parse_rc;

    try {
        if (simulate->parsed()) {
            sim.run_monte_carlo = !no_mc;
            run_simulate(sim);
            std::printf("wrote data.csv, truth.csv%s under %s\n",
                        sim.run_monte_carlo ? ", mc_pcc.csv" : "", sim.out_dir.c_str());
        } else if (identify->parsed()) {
            IdentifyResult r = run_identify(ident);
            std::printf("k=%zu accuracy=%.4f (%zu/%zu validated)\n", r.k, r.report.accuracy,
                        r.report.n_validated, r.report.n_total);
        } else if (sweep_cmd->parsed()) {
            if (sweep.c_grid_kw.empty()) sweep.c_grid_kw = range_grid(c_min, c_max, c_step);
            if (sweep.t_dur_grid_hours.empty())
                sweep.t_dur_grid_hours = range_grid(t_min, t_max, t_step);
            SweepResult r = run_sweep(sweep);
            std::printf("best: C=%.2f kW T_dur=%.2f h k=%zu accuracy=%.4f\n",
                        r.best.c_threshold_kw, r.best.t_dur_hours, r.best.k, r.best.accuracy);
        } else if (ensemble->parsed()) {
            EnsembleResult r = run_ensemble(ens);
            if (r.report)
                std::printf("members=%zu accuracy=%.4f\n", r.ensemble.members.size(),
                            r.report->accuracy);
            else
                std::printf("members=%zu clusters=%zu (no truth supplied)\n",
                            r.ensemble.members.size(), r.partition.k);
        } else if (evaluate->parsed()) {
            AccuracyReport r = run_evaluate(eval);
            std::printf("accuracy=%.4f (%zu/%zu validated)\n", r.accuracy, r.n_validated,
                        r.n_total);
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "contract violation: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

#include "phaseid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phaseid/errors.hpp"
#include "phaseid/io.hpp"
#include "phaseid/segmentation.hpp"

namespace phaseid {

const char* const kToolVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::uint64_t fnv_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void ensure_out_dir(const std::string& out_dir) {
    if (!out_dir.empty()) fs::create_directories(out_dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write artifact: " + path);
    out << text;
}

json report_json(const AccuracyReport& r) {
    json j;
    j["n_total"] = r.n_total;
    j["n_validated"] = r.n_validated;
    j["n_corrected"] = r.n_corrected;
    j["accuracy"] = r.accuracy;
    const char* names[3] = {"A", "B", "C"};
    for (std::size_t p = 0; p < 3; ++p) {
        j["phases"][names[p]]["recorded"] = r.recorded_counts[p];
        j["phases"][names[p]]["predicted"] = r.predicted_counts[p];
    }
    return j;
}

// Recorded labels from the CSV, optionally replaced by a labels file; every
// meter must end up labeled.
std::vector<Phase> resolve_labels(const FeederDataset& ds, const std::string& labels_file) {
    std::map<std::string, Phase> file_labels;
    if (!labels_file.empty()) file_labels = load_phase_file(labels_file);
    std::vector<Phase> labels;
    labels.reserve(ds.meter_count());
    std::size_t missing = 0;
    for (const auto& meter : ds.meters) {
        auto it = file_labels.find(meter.meter_id);
        if (it != file_labels.end()) {
            labels.push_back(it->second);
        } else if (meter.recorded_phase) {
            labels.push_back(*meter.recorded_phase);
        } else {
            labels.push_back(Phase::A);
            ++missing;
        }
    }
    if (missing > 0)
        throw ConfigError(std::to_string(missing) +
                          " meters have no recorded phase label; majority-vote identification "
                          "needs labels -- use the 'ensemble' subcommand for unlabeled feeders");
    return labels;
}

std::vector<std::optional<Phase>> resolve_corrections(const FeederDataset& ds,
                                                      const std::string& corrections_file) {
    std::vector<std::optional<Phase>> corrections(ds.meter_count());
    if (corrections_file.empty()) return corrections;
    auto entries = load_phase_file(corrections_file);
    for (const auto& [id, phase] : entries) {
        int idx = ds.find_meter(id);
        if (idx < 0) throw InputError("corrections file names unknown meter '" + id + "'");
        corrections[static_cast<std::size_t>(idx)] = phase;
    }
    return corrections;
}

// n_max = 0 means "as deep as the data allows, up to the usual 12".
// An explicit request beyond N/3 clusters per phase is a contract error.
std::size_t resolve_n_max(std::size_t n_max, std::size_t n_meters) {
    std::size_t max_possible = n_meters / 3;
    if (max_possible == 0)
        throw ConfigError("need at least 3 meters to form 3 clusters");
    if (n_max == 0) return std::min<std::size_t>(12, max_possible);
    if (3 * n_max > n_meters)
        throw ContractError("3*n_max = " + std::to_string(3 * n_max) +
                            " clusters exceeds the meter count " + std::to_string(n_meters));
    return n_max;
}

// Semantic parameters only: worker counts and cache locations change how
// fast a run finishes, never what it produces, so they stay out of the
// config echo and its hash.
json common_json(const CommonConfig& c) {
    json j;
    j["input"] = c.input;
    j["schema_file"] = c.schema_file;
    j["max_missing"] = c.max_missing;
    j["min_pcc_samples"] = c.min_pcc_samples;
    j["linkage"] = to_string(c.linkage);
    return j;
}

}  // namespace

std::string artifact_header(const std::string& config_text) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv_hash(config_text)));
    return std::string("# phaseid ") + kToolVersion + " config=" + buf;
}

PreparedData prepare_dataset(const CommonConfig& common) {
    CsvSchema schema;
    if (!common.schema_file.empty()) schema = load_schema_config(common.schema_file);
    FeederDataset raw = load_meter_csv(common.input, schema);
    PreparedData prepared;
    FeederDataset kept = drop_sparse_meters(raw, common.max_missing, &prepared.dropped_meters);
    if (kept.meter_count() == 0)
        throw InputError("all meters exceeded the missing-data limit; nothing to analyze");
    NormalizeReport norm;
    prepared.dataset = normalize_voltages(kept, &norm);
    prepared.outlier_count = norm.outlier_count;
    return prepared;
}

void write_assignment_csv(const std::string& path, const std::vector<std::string>& meter_ids,
                          const Partition& partition, const PhaseAssignment* assignment,
                          const std::vector<Phase>* recorded, const std::string& artifact_header) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write assignment CSV: " + path);
    if (!artifact_header.empty()) out << artifact_header << "\n";
    out << "meter_id,cluster";
    if (assignment) out << ",predicted_phase,recorded_phase,match";
    out << "\n";
    for (std::size_t m = 0; m < meter_ids.size(); ++m) {
        out << meter_ids[m] << ',' << partition.assignment[m];
        if (assignment) {
            Phase pred = assignment->predicted[m];
            out << ',' << phase_char(pred) << ',';
            if (recorded) {
                Phase rec = (*recorded)[m];
                out << phase_char(rec) << ',' << (pred == rec ? 1 : 0);
            } else {
                out << ',';
            }
        }
        out << "\n";
    }
}

IdentifyResult run_identify(const IdentifyConfig& config) {
    PreparedData prepared = prepare_dataset(config.common);
    const FeederDataset& ds = prepared.dataset;
    std::vector<Phase> labels = resolve_labels(ds, config.labels_file);
    std::size_t n_corrected = 0;
    std::vector<Phase> truth =
        apply_corrections(labels, resolve_corrections(ds, config.corrections_file), &n_corrected);

    SegmentParams params;
    params.c_threshold_kw = config.c_threshold_kw;
    params.t_dur_hours = config.t_dur_hours;
    params.delta_t_minutes = ds.delta_t_minutes;
    CorrelationOptions copts;
    copts.min_pcc_samples = config.common.min_pcc_samples;
    copts.workers = config.common.workers;

    DistanceMatrix dist = cached_distance_matrix(ds, params, copts, config.common.cache_dir);
    Dendrogram dg = agglomerative_cluster(dist, config.common.linkage);

    IdentifyResult result;
    result.meter_ids = dist.meter_ids;
    result.truth = truth;
    json per_k = json::array();

    if (config.k > 0) {
        if (config.k > ds.meter_count())
            throw ConfigError("k=" + std::to_string(config.k) + " exceeds the meter count");
        result.k = config.k;
        result.partition = cut(dg, config.k);
        result.assignment = majority_vote(result.partition, labels);
        result.report = score(result.assignment, truth);
    } else {
        std::size_t n_max = resolve_n_max(config.n_max, ds.meter_count());
        double best = -1.0;
        for (std::size_t i = 1; i <= n_max; ++i) {
            std::size_t k = 3 * i;
            Partition part = cut(dg, k);
            PhaseAssignment assign = majority_vote(part, labels);
            AccuracyReport rep = score(assign, truth);
            per_k.push_back({{"k", k}, {"accuracy", rep.accuracy}});
            if (rep.accuracy > best) {
                best = rep.accuracy;
                result.k = k;
                result.partition = std::move(part);
                result.assignment = std::move(assign);
                result.report = rep;
            }
        }
    }
    result.report.n_corrected = n_corrected;

    if (!config.common.out_dir.empty()) {
        ensure_out_dir(config.common.out_dir);
        json cfg = common_json(config.common);
        cfg["subcommand"] = "identify";
        cfg["c_threshold_kw"] = config.c_threshold_kw;
        cfg["t_dur_hours"] = config.t_dur_hours;
        cfg["k"] = config.k;
        cfg["n_max"] = config.n_max;
        cfg["labels_file"] = config.labels_file;
        cfg["corrections_file"] = config.corrections_file;
        std::string header = artifact_header(cfg.dump());

        fs::path dir(config.common.out_dir);
        write_assignment_csv((dir / "assignment.csv").string(), result.meter_ids, result.partition,
                             &result.assignment, &truth, header);
        write_text((dir / "dendrogram.json").string(),
                   "{\"tool\":\"phaseid " + std::string(kToolVersion) + "\",\"config\":\"" +
                       header.substr(header.find("config=") + 7) + "\",\"dendrogram\":" +
                       dendrogram_to_json(dg) + "}\n");
        if (config.dump_distance)
            write_matrix_csv((dir / "distance.csv").string(), dist.meter_ids, dist.dist, dist.n,
                             header);

        json report;
        report["tool"] = std::string("phaseid ") + kToolVersion;
        report["config"] = cfg;
        report["dropped_meters"] = prepared.dropped_meters;
        report["voltage_outliers"] = prepared.outlier_count;
        report["k"] = result.k;
        report["accuracy_by_k"] = per_k;
        report["result"] = report_json(result.report);
        write_text((dir / "report.json").string(), report.dump(2) + "\n");

        if (config.dump_segments) {
            json segments = json::array();
            for (std::size_t i = 0; i < ds.meter_count(); ++i) {
                for (std::size_t j = i + 1; j < ds.meter_count(); ++j) {
                    SegmentSet seg =
                        joint_segments(ds.meters[i], ds.meters[j], params, copts.min_pcc_samples);
                    json entry;
                    entry["pair"] = {ds.meters[i].meter_id, ds.meters[j].meter_id};
                    entry["fallback_used"] = seg.fallback_used;
                    entry["total_points"] = seg.total_points;
                    json runs = json::array();
                    for (const auto& r : seg.runs) runs.push_back({r.begin, r.end});
                    entry["runs"] = runs;
                    segments.push_back(entry);
                }
            }
            json seg_doc;
            seg_doc["tool"] = std::string("phaseid ") + kToolVersion;
            seg_doc["config"] = header.substr(header.find("config=") + 7);
            seg_doc["segments"] = segments;
            write_text((dir / "segments.json").string(), seg_doc.dump() + "\n");
        }
    }
    return result;
}

SweepResult run_sweep(const SweepConfig& config) {
    PreparedData prepared = prepare_dataset(config.common);
    const FeederDataset& ds = prepared.dataset;
    std::vector<Phase> labels = resolve_labels(ds, config.labels_file);
    std::size_t n_corrected = 0;
    std::vector<Phase> truth =
        apply_corrections(labels, resolve_corrections(ds, config.corrections_file), &n_corrected);

    std::vector<double> c_grid = config.c_grid_kw;
    if (c_grid.empty())
        for (int i = 0; i <= 20; ++i) c_grid.push_back(0.1 * i);
    std::vector<double> t_grid = config.t_dur_grid_hours;
    if (t_grid.empty())
        for (int i = 0; i <= 6; ++i) t_grid.push_back(0.5 * i);
    std::size_t n_max = resolve_n_max(config.n_max, ds.meter_count());

    CorrelationOptions copts;
    copts.min_pcc_samples = config.common.min_pcc_samples;
    copts.workers = config.common.workers;

    SweepResult result;
    const std::size_t nc = c_grid.size(), nt = t_grid.size();
    std::vector<double> cell_best(nc * nt, -1.0);   // per (C,T): best over k
    std::vector<std::size_t> cell_k(nc * nt, 0);
    double best = -1.0;
    for (std::size_t ci = 0; ci < nc; ++ci) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            SegmentParams params;
            params.c_threshold_kw = c_grid[ci];
            params.t_dur_hours = t_grid[ti];
            params.delta_t_minutes = ds.delta_t_minutes;
            DistanceMatrix dist =
                cached_distance_matrix(ds, params, copts, config.common.cache_dir);
            Dendrogram dg = agglomerative_cluster(dist, config.common.linkage);
            for (std::size_t i = 1; i <= n_max; ++i) {
                std::size_t k = 3 * i;
                AccuracyReport rep = score(majority_vote(cut(dg, k), labels), truth);
                result.cells.push_back({c_grid[ci], t_grid[ti], k, rep.accuracy});
                if (rep.accuracy > cell_best[ci * nt + ti]) {
                    cell_best[ci * nt + ti] = rep.accuracy;
                    cell_k[ci * nt + ti] = k;
                }
                best = std::max(best, rep.accuracy);
            }
        }
    }

    // Ties on the maximum are resolved toward the most robust setting: the
    // maximal (C, T_dur) cell farthest (grid L1) from any worse cell. A
    // parameter choice in the middle of the optimal plateau survives load
    // pattern drift better than one on its edge.
    std::ptrdiff_t best_dist = -1;
    for (std::size_t ci = 0; ci < nc; ++ci) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            if (cell_best[ci * nt + ti] != best) continue;
            std::ptrdiff_t nearest = std::numeric_limits<std::ptrdiff_t>::max();
            for (std::size_t cj = 0; cj < nc; ++cj)
                for (std::size_t tj = 0; tj < nt; ++tj)
                    if (cell_best[cj * nt + tj] != best)
                        nearest = std::min<std::ptrdiff_t>(
                            nearest, std::abs(static_cast<std::ptrdiff_t>(cj) -
                                              static_cast<std::ptrdiff_t>(ci)) +
                                         std::abs(static_cast<std::ptrdiff_t>(tj) -
                                                  static_cast<std::ptrdiff_t>(ti)));
            if (nearest == std::numeric_limits<std::ptrdiff_t>::max()) nearest = 0;
            if (nearest > best_dist) {
                best_dist = nearest;
                result.best = {c_grid[ci], t_grid[ti], cell_k[ci * nt + ti], best};
            }
        }
    }

    if (!config.common.out_dir.empty()) {
        ensure_out_dir(config.common.out_dir);
        json cfg = common_json(config.common);
        cfg["subcommand"] = "sweep";
        cfg["c_grid"] = c_grid;
        cfg["t_dur_grid"] = t_grid;
        cfg["n_max"] = n_max;
        cfg["labels_file"] = config.labels_file;
        cfg["corrections_file"] = config.corrections_file;
        std::string header = artifact_header(cfg.dump());

        fs::path dir(config.common.out_dir);
        std::ostringstream csv;
        csv << header << "\nc_kw,t_dur_h,k,accuracy\n";
        for (const auto& cell : result.cells)
            csv << format_double(cell.c_threshold_kw) << ',' << format_double(cell.t_dur_hours)
                << ',' << cell.k << ',' << format_double(cell.accuracy) << "\n";
        write_text((dir / "sweep.csv").string(), csv.str());

        json report;
        report["tool"] = std::string("phaseid ") + kToolVersion;
        report["config"] = cfg;
        report["dropped_meters"] = prepared.dropped_meters;
        report["best"] = {{"c_kw", result.best.c_threshold_kw},
                          {"t_dur_h", result.best.t_dur_hours},
                          {"k", result.best.k},
                          {"accuracy", result.best.accuracy}};
        write_text((dir / "report.json").string(), report.dump(2) + "\n");
    }
    return result;
}

EnsembleResult run_ensemble(const EnsembleConfig& config) {
    PreparedData prepared = prepare_dataset(config.common);
    const FeederDataset& ds = prepared.dataset;

    std::vector<double> c_grid = config.c_grid_kw;
    if (c_grid.empty()) c_grid = {1.2, 1.3, 1.4, 1.5, 1.6};
    std::vector<double> t_grid = config.t_dur_grid_hours;
    if (t_grid.empty()) t_grid = {2.0, 2.5};
    std::size_t target = config.target_clusters > 0 ? config.target_clusters
                                                    : default_target_clusters(ds.meter_count());

    EnsembleOptions opts;
    opts.linkage = config.common.linkage;
    opts.correlation.min_pcc_samples = config.common.min_pcc_samples;
    opts.correlation.workers = config.common.workers;
    opts.cache_dir = config.common.cache_dir;

    EnsembleResult result;
    result.ensemble = build_ensemble(ds, c_grid, t_grid, target, opts);
    ClusterGraph graph = cluster_graph(result.ensemble);
    result.similarity = cts_matrix(result.ensemble, graph, config.decay);
    result.partition = final_partition(result.similarity, target, config.common.linkage);
    result.meter_ids = result.ensemble.meter_ids;

    std::optional<PhaseAssignment> assignment;
    std::vector<Phase> truth;
    json member_acc = json::array();
    if (!config.truth_file.empty()) {
        auto truth_map = load_phase_file(config.truth_file);
        truth.reserve(ds.meter_count());
        for (const auto& meter : ds.meters) {
            auto it = truth_map.find(meter.meter_id);
            if (it == truth_map.end())
                throw InputError("truth file is missing meter '" + meter.meter_id + "'");
            truth.push_back(it->second);
        }
        assignment = majority_vote(result.partition, truth);
        result.report = score(*assignment, truth);
        for (const auto& member : result.ensemble.members)
            member_acc.push_back(score(majority_vote(member.partition, truth), truth).accuracy);
    }

    if (!config.common.out_dir.empty()) {
        ensure_out_dir(config.common.out_dir);
        json cfg = common_json(config.common);
        cfg["subcommand"] = "ensemble";
        cfg["c_grid"] = c_grid;
        cfg["t_dur_grid"] = t_grid;
        cfg["target_clusters"] = target;
        cfg["decay"] = config.decay;
        cfg["truth_file"] = config.truth_file;
        std::string header = artifact_header(cfg.dump());

        fs::path dir(config.common.out_dir);
        write_assignment_csv((dir / "clusters.csv").string(), result.meter_ids, result.partition,
                             assignment ? &*assignment : nullptr, truth.empty() ? nullptr : &truth,
                             header);
        write_matrix_csv((dir / "similarity.csv").string(), result.similarity.meter_ids,
                         result.similarity.sim, result.similarity.n, header);

        json report;
        report["tool"] = std::string("phaseid ") + kToolVersion;
        report["config"] = cfg;
        report["dropped_meters"] = prepared.dropped_meters;
        report["members"] = result.ensemble.members.size();
        if (result.report) {
            report["member_accuracies"] = member_acc;
            report["result"] = report_json(*result.report);
        }
        write_text((dir / "report.json").string(), report.dump(2) + "\n");
    }
    return result;
}

void run_simulate(const SimulateConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("simulate: an output directory is required");
    ensure_out_dir(config.out_dir);

    json cfg;
    cfg["subcommand"] = "simulate";
    cfg["meters_per_phase"] = config.feeder.meters_per_phase;
    cfg["transformers_per_phase"] = config.feeder.transformers_per_phase;
    cfg["days"] = config.feeder.days;
    cfg["delta_t_minutes"] = config.feeder.delta_t_minutes;
    cfg["missing_fraction"] = config.feeder.missing_fraction;
    cfg["seed"] = config.feeder.seed;
    cfg["spike_max_kw"] = config.feeder.spike_max_kw;
    cfg["day_spike_rate_per_hour"] = config.feeder.day_spike_rate_per_hour;
    cfg["mc"] = config.run_monte_carlo;
    std::string header = artifact_header(cfg.dump());

    SyntheticFeeder feeder = generate_synthetic_feeder(config.feeder);
    fs::path dir(config.out_dir);
    write_meter_csv(feeder.dataset, (dir / "data.csv").string(), header);
    write_truth_csv(feeder.truth, (dir / "truth.csv").string(), header);

    if (config.run_monte_carlo) {
        std::ostringstream csv;
        csv << header << "\nconn_type,band_volts,bin_lo_kw,bin_hi_kw,pcc,n_samples,redraws\n";
        auto bins = uniform_bins(0.0, 15.0, config.mc_bins);
        for (int type = 1; type <= 3; ++type) {
            auto conn = static_cast<ConnectionType>(type);
            SecondaryCircuit circuit = SecondaryCircuit::make(
                conn, conn == ConnectionType::InParallel ? 0.0 : 0.01, 0.05,
                conn == ConnectionType::InSeries ? 0.0 : 0.05);
            for (double band : config.mc_bands_volts) {
                MonteCarloOptions mc;
                mc.band_volts = band;
                mc.n_per_bin = config.mc_samples_per_bin;
                mc.seed = config.feeder.seed;
                MonteCarloResult result = monte_carlo_pcc(circuit, bins, mc);
                for (std::size_t b = 0; b < bins.size(); ++b)
                    csv << type << ',' << format_double(band) << ','
                        << format_double(bins[b].lo_kw) << ',' << format_double(bins[b].hi_kw)
                        << ',' << format_double(result.pcc[b]) << ',' << mc.n_per_bin << ','
                        << result.infeasible_redraws[b] << "\n";
            }
        }
        write_text((dir / "mc_pcc.csv").string(), csv.str());
    }
}

AccuracyReport run_evaluate(const EvaluateConfig& config) {
    std::ifstream in(config.predictions_file);
    if (!in) throw InputError("cannot open predictions file: " + config.predictions_file);
    std::string line;
    int id_col = -1, pred_col = -1;
    std::vector<std::string> ids;
    std::vector<Phase> predicted;
    bool header_done = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!header_done) {
            header_done = true;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "meter_id") id_col = static_cast<int>(i);
                if (fields[i] == "predicted_phase") pred_col = static_cast<int>(i);
            }
            if (id_col < 0 || pred_col < 0)
                throw InputError("predictions file needs meter_id and predicted_phase columns");
            continue;
        }
        if (fields.size() <= static_cast<std::size_t>(std::max(id_col, pred_col)))
            throw InputError("predictions row " + std::to_string(lineno) + ": too few fields");
        auto p = fields[pred_col].size() == 1 ? phase_from_char(fields[pred_col][0]) : std::nullopt;
        if (!p)
            throw InputError("predictions row " + std::to_string(lineno) + ": bad phase '" +
                             fields[pred_col] + "'");
        ids.push_back(fields[id_col]);
        predicted.push_back(*p);
    }
    if (ids.empty()) throw InputError("predictions file has no rows");

    auto truth_map = load_phase_file(config.truth_file);
    std::vector<Phase> truth;
    for (const auto& id : ids) {
        auto it = truth_map.find(id);
        if (it == truth_map.end()) throw InputError("truth file is missing meter '" + id + "'");
        truth.push_back(it->second);
    }

    PhaseAssignment assignment;
    assignment.predicted = predicted;
    AccuracyReport report = score(assignment, truth);

    if (!config.out_dir.empty()) {
        ensure_out_dir(config.out_dir);
        json cfg;
        cfg["subcommand"] = "evaluate";
        cfg["predictions_file"] = config.predictions_file;
        cfg["truth_file"] = config.truth_file;
        json j;
        j["tool"] = std::string("phaseid ") + kToolVersion;
        j["config"] = cfg;
        j["result"] = report_json(report);
        write_text((fs::path(config.out_dir) / "report.json").string(), j.dump(2) + "\n");
    }
    return report;
}

}  // namespace phaseid

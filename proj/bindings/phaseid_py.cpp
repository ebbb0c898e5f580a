#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phaseid/circuit.hpp"
#include "phaseid/clustering.hpp"
#include "phaseid/correlation.hpp"
#include "phaseid/ensemble.hpp"
#include "phaseid/errors.hpp"
#include "phaseid/ingest.hpp"
#include "phaseid/labeling.hpp"
#include "phaseid/segmentation.hpp"
#include "phaseid/synthetic.hpp"

namespace py = pybind11;
using namespace phaseid;

namespace {

py::array_t<double> square_array(const std::vector<double>& values, std::size_t n) {
    return py::array_t<double>({n, n}, values.data());
}

std::vector<Phase> phases_from_strings(const std::vector<std::string>& labels) {
    std::vector<Phase> out;
    out.reserve(labels.size());
    for (const auto& s : labels) {
        auto p = s.size() == 1 ? phase_from_char(s[0]) : std::nullopt;
        if (!p) throw ConfigError("phase label '" + s + "' is not one of A,B,C");
        out.push_back(*p);
    }
    return out;
}

std::vector<std::string> phases_to_strings(const std::vector<Phase>& phases) {
    std::vector<std::string> out;
    out.reserve(phases.size());
    for (auto p : phases) out.emplace_back(1, phase_char(p));
    return out;
}

Partition partition_from_array(py::array_t<std::uint32_t> assignment) {
    auto r = assignment.unchecked<1>();
    std::vector<std::uint32_t> raw(static_cast<std::size_t>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i) raw[static_cast<std::size_t>(i)] = r(i);
    return Partition::from_assignment(std::move(raw));
}

py::array_t<std::uint32_t> assignment_array(const Partition& p) {
    return py::array_t<std::uint32_t>(static_cast<py::ssize_t>(p.assignment.size()),
                                      p.assignment.data());
}

std::vector<double> matrix_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> m,
                                      std::size_t& n) {
    if (m.ndim() != 2 || m.shape(0) != m.shape(1))
        throw ContractError("expected a square matrix");
    n = static_cast<std::size_t>(m.shape(0));
    std::vector<double> out(n * n);
    std::copy(m.data(), m.data() + n * n, out.begin());
    return out;
}

}  // namespace

PYBIND11_MODULE(_phaseid, m) {
    m.doc() = "Smart-meter phase identification: segmentation, correlation clustering, "
              "CTS ensembles and the secondary-circuit simulator.";

    py::register_exception<InputError>(m, "InputError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ContractError>(m, "ContractError");
    py::register_exception<InfeasibleSampleError>(m, "InfeasibleSampleError");

    // --- dataset & ingest
    py::class_<FeederDataset>(m, "Dataset")
        .def_property_readonly("meter_ids",
                               [](const FeederDataset& ds) {
                                   std::vector<std::string> ids;
                                   for (const auto& meter : ds.meters) ids.push_back(meter.meter_id);
                                   return ids;
                               })
        .def_property_readonly("timestamps",
                               [](const FeederDataset& ds) { return ds.timestamps; })
        .def_property_readonly("delta_t_minutes",
                               [](const FeederDataset& ds) { return ds.delta_t_minutes; })
        .def_property_readonly("n_meters", &FeederDataset::meter_count)
        .def_property_readonly("n_samples", &FeederDataset::sample_count)
        .def("gap_count", &FeederDataset::gap_count)
        .def("power",
             [](const FeederDataset& ds, std::size_t i) {
                 const auto& v = ds.meters.at(i).power_kw;
                 return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
             })
        .def("voltage",
             [](const FeederDataset& ds, std::size_t i) {
                 const auto& v = ds.meters.at(i).voltage;
                 return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
             })
        .def("recorded_phases",
             [](const FeederDataset& ds) {
                 std::vector<std::string> out;
                 for (const auto& meter : ds.meters)
                     out.emplace_back(meter.recorded_phase ? std::string(1, phase_char(*meter.recorded_phase))
                                                           : std::string());
                 return out;
             })
        .def("to_csv", [](const FeederDataset& ds, const std::string& path) {
            write_meter_csv(ds, path);
        });

    m.def("load_meter_csv",
          [](const std::string& path, const std::string& schema_file) {
              CsvSchema schema;
              if (!schema_file.empty()) schema = load_schema_config(schema_file);
              return load_meter_csv(path, schema);
          },
          py::arg("path"), py::arg("schema_file") = "");
    m.def("drop_sparse_meters",
          [](const FeederDataset& ds, double max_missing) {
              std::vector<std::string> removed;
              FeederDataset out = drop_sparse_meters(ds, max_missing, &removed);
              return py::make_tuple(out, removed);
          },
          py::arg("dataset"), py::arg("max_missing") = 0.80);
    m.def("normalize_voltages",
          [](const FeederDataset& ds) { return normalize_voltages(ds); });

    // --- segmentation
    m.def("low_power_mask",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> power, double c) {
              std::vector<double> p(power.data(), power.data() + power.size());
              return low_power_mask(p, c);
          },
          py::arg("power_kw"), py::arg("c_threshold_kw"));
    m.def("joint_segments",
          [](const FeederDataset& ds, std::size_t i, std::size_t j, double c, double t_dur,
             std::size_t min_total_points) {
              SegmentParams params{c, t_dur, ds.delta_t_minutes};
              SegmentSet s = joint_segments(ds.meters.at(i), ds.meters.at(j), params,
                                            min_total_points);
              std::vector<std::pair<std::size_t, std::size_t>> runs;
              for (const auto& r : s.runs) runs.emplace_back(r.begin, r.end);
              py::dict out;
              out["runs"] = runs;
              out["total_points"] = s.total_points;
              out["fallback_used"] = s.fallback_used;
              return out;
          },
          py::arg("dataset"), py::arg("i"), py::arg("j"), py::arg("c_threshold_kw"),
          py::arg("t_dur_hours"), py::arg("min_total_points") = 0);

    // --- correlation
    m.def("pcc",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
             py::array_t<double, py::array::c_style | py::array::forcecast> y) {
              std::vector<double> xv(x.data(), x.data() + x.size());
              std::vector<double> yv(y.data(), y.data() + y.size());
              return pcc(xv, yv);
          });
    m.def("correlation_distance", &correlation_distance);

    py::class_<DistanceMatrix>(m, "DistanceMatrix")
        .def_property_readonly("n", [](const DistanceMatrix& d) { return d.n; })
        .def_property_readonly("meter_ids", [](const DistanceMatrix& d) { return d.meter_ids; })
        .def_property_readonly("dist",
                               [](const DistanceMatrix& d) { return square_array(d.dist, d.n); })
        .def_property_readonly("pcc",
                               [](const DistanceMatrix& d) { return square_array(d.pcc, d.n); })
        .def("fallback_used",
             [](const DistanceMatrix& d, std::size_t i, std::size_t j) {
                 return d.pair_meta(i, j).fallback_used;
             })
        .def("total_points", [](const DistanceMatrix& d, std::size_t i, std::size_t j) {
            return d.pair_meta(i, j).total_points;
        });

    m.def("pairwise_distance_matrix",
          [](const FeederDataset& ds, double c, double t_dur, std::size_t min_pcc_samples,
             unsigned workers) {
              SegmentParams params{c, t_dur, ds.delta_t_minutes};
              CorrelationOptions opts;
              opts.min_pcc_samples = min_pcc_samples;
              opts.workers = workers;
              return pairwise_distance_matrix(ds, params, opts);
          },
          py::arg("dataset"), py::arg("c_threshold_kw"), py::arg("t_dur_hours"),
          py::arg("min_pcc_samples") = 96, py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    // --- clustering
    py::class_<Dendrogram>(m, "Dendrogram")
        .def_property_readonly("n_leaves", [](const Dendrogram& d) { return d.n_leaves; })
        .def_property_readonly("merges", [](const Dendrogram& d) {
            py::array_t<double> out({d.merges.size(), static_cast<std::size_t>(4)});
            auto w = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < d.merges.size(); ++i) {
                w(i, 0) = d.merges[i].a;
                w(i, 1) = d.merges[i].b;
                w(i, 2) = d.merges[i].height;
                w(i, 3) = d.merges[i].size;
            }
            return out;
        });

    m.def("agglomerative_cluster",
          [](const DistanceMatrix& d, const std::string& linkage) {
              return agglomerative_cluster(d, linkage_from_string(linkage));
          },
          py::arg("matrix"), py::arg("linkage") = "average");
    m.def("agglomerative_cluster",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> matrix,
             const std::string& linkage) {
              std::size_t n;
              auto dist = matrix_from_array(matrix, n);
              return agglomerative_cluster(n, dist, linkage_from_string(linkage));
          },
          py::arg("matrix"), py::arg("linkage") = "average");
    m.def("cut", [](const Dendrogram& dg, std::size_t k) { return assignment_array(cut(dg, k)); });
    m.def("cluster_sweep", [](const Dendrogram& dg, std::size_t n_max) {
        std::vector<py::array_t<std::uint32_t>> out;
        for (auto& p : cluster_sweep(dg, n_max)) out.push_back(assignment_array(p));
        return out;
    });

    // --- labeling
    m.def("majority_vote",
          [](py::array_t<std::uint32_t> assignment, const std::vector<std::string>& labels) {
              Partition p = partition_from_array(assignment);
              PhaseAssignment a = majority_vote(p, phases_from_strings(labels));
              return phases_to_strings(a.predicted);
          },
          py::arg("assignment"), py::arg("labels"));
    m.def("score",
          [](const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
              PhaseAssignment a;
              a.predicted = phases_from_strings(predicted);
              AccuracyReport r = score(a, phases_from_strings(truth));
              py::dict out;
              out["n_total"] = r.n_total;
              out["n_validated"] = r.n_validated;
              out["accuracy"] = r.accuracy;
              return out;
          },
          py::arg("predicted"), py::arg("truth"));

    // --- ensemble
    py::class_<Ensemble>(m, "Ensemble")
        .def_property_readonly("target_clusters",
                               [](const Ensemble& e) { return e.target_clusters; })
        .def_property_readonly("meter_ids", [](const Ensemble& e) { return e.meter_ids; })
        .def_property_readonly("member_assignments", [](const Ensemble& e) {
            std::vector<py::array_t<std::uint32_t>> out;
            for (const auto& member : e.members) out.push_back(assignment_array(member.partition));
            return out;
        });

    m.def("build_ensemble",
          [](const FeederDataset& ds, const std::vector<double>& c_grid,
             const std::vector<double>& t_grid, std::size_t target_clusters, unsigned workers) {
              EnsembleOptions opts;
              opts.correlation.workers = workers;
              std::size_t target = target_clusters > 0 ? target_clusters
                                                       : default_target_clusters(ds.meter_count());
              return build_ensemble(ds, c_grid, t_grid, target, opts);
          },
          py::arg("dataset"), py::arg("c_grid_kw"), py::arg("t_dur_grid_hours"),
          py::arg("target_clusters") = 0, py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("cts_similarity",
          [](const Ensemble& e, double decay) {
              SimilarityMatrix s = cts_matrix(e, cluster_graph(e), decay);
              return square_array(s.sim, s.n);
          },
          py::arg("ensemble"), py::arg("decay") = 0.8);
    m.def("final_partition",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> sim, std::size_t k) {
              SimilarityMatrix s;
              s.sim = matrix_from_array(sim, s.n);
              return assignment_array(final_partition(s, k));
          },
          py::arg("similarity"), py::arg("k"));
    m.def("default_target_clusters", &default_target_clusters);

    // --- circuit simulation
    py::class_<CircuitSample>(m, "CircuitSample")
        .def_readonly("v_t", &CircuitSample::v_t)
        .def_readonly("p_i_kw", &CircuitSample::p_i_kw)
        .def_readonly("p_j_kw", &CircuitSample::p_j_kw)
        .def_readonly("v_i", &CircuitSample::v_i)
        .def_readonly("v_j", &CircuitSample::v_j)
        .def_readonly("i_i", &CircuitSample::i_i)
        .def_readonly("i_j", &CircuitSample::i_j)
        .def_readonly("i_shared", &CircuitSample::i_shared);

    m.def("solve_secondary",
          [](int conn_type, double r_shared, double r_i, double r_j, double v_t, double p_i,
             double p_j) {
              auto circuit = SecondaryCircuit::make(static_cast<ConnectionType>(conn_type),
                                                    r_shared, r_i, r_j);
              return solve_secondary(circuit, v_t, p_i, p_j);
          },
          py::arg("conn_type"), py::arg("r_shared"), py::arg("r_i"), py::arg("r_j"),
          py::arg("v_t"), py::arg("p_i_kw"), py::arg("p_j_kw"));

    m.def("monte_carlo_pcc",
          [](int conn_type, double r_shared, double r_i, double r_j,
             const std::vector<std::pair<double, double>>& bins, double band_volts,
             std::size_t n_per_bin, std::uint64_t seed, bool identical_loads) {
              auto circuit = SecondaryCircuit::make(static_cast<ConnectionType>(conn_type),
                                                    r_shared, r_i, r_j);
              std::vector<PowerBin> pb;
              for (auto [lo, hi] : bins) pb.push_back({lo, hi});
              MonteCarloOptions opts;
              opts.band_volts = band_volts;
              opts.n_per_bin = n_per_bin;
              opts.seed = seed;
              opts.identical_loads = identical_loads;
              MonteCarloResult r = monte_carlo_pcc(circuit, pb, opts);
              py::dict out;
              out["pcc"] = r.pcc;
              out["infeasible_redraws"] = r.infeasible_redraws;
              return out;
          },
          py::arg("conn_type"), py::arg("r_shared"), py::arg("r_i"), py::arg("r_j"),
          py::arg("bins"), py::arg("band_volts") = 0.2, py::arg("n_per_bin") = 10000,
          py::arg("seed") = 1, py::arg("identical_loads") = false);

    // --- synthetic feeder
    m.def("generate_synthetic_feeder",
          [](std::size_t meters_per_phase, std::size_t transformers_per_phase, std::size_t days,
             double delta_t_minutes, double missing_fraction, std::uint64_t seed,
             double spike_min_kw, double spike_max_kw, double day_spike_rate_per_hour,
             double night_spike_rate_per_hour) {
              SyntheticFeederConfig cfg;
              cfg.meters_per_phase = meters_per_phase;
              cfg.transformers_per_phase = transformers_per_phase;
              cfg.days = days;
              cfg.delta_t_minutes = delta_t_minutes;
              cfg.missing_fraction = missing_fraction;
              cfg.seed = seed;
              cfg.spike_min_kw = spike_min_kw;
              cfg.spike_max_kw = spike_max_kw;
              cfg.day_spike_rate_per_hour = day_spike_rate_per_hour;
              cfg.night_spike_rate_per_hour = night_spike_rate_per_hour;
              SyntheticFeeder feeder = generate_synthetic_feeder(cfg);
              py::dict truth;
              truth["meter_ids"] = feeder.truth.meter_ids;
              truth["phase"] = phases_to_strings(feeder.truth.phase);
              truth["transformer_ids"] = feeder.truth.transformer_ids;
              return py::make_tuple(feeder.dataset, truth);
          },
          py::arg("meters_per_phase") = 30, py::arg("transformers_per_phase") = 15,
          py::arg("days") = 30, py::arg("delta_t_minutes") = 15.0,
          py::arg("missing_fraction") = 0.0857, py::arg("seed") = 1,
          py::arg("spike_min_kw") = 2.0, py::arg("spike_max_kw") = 7.0,
          py::arg("day_spike_rate_per_hour") = 0.55, py::arg("night_spike_rate_per_hour") = 0.05);

#ifdef PHASEID_VERSION
    m.attr("__version__") = PHASEID_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}

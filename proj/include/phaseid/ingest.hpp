#pragma once

#include <map>
#include <string>
#include <vector>

#include "phaseid/dataset.hpp"

namespace phaseid {

// Column-name mapping plus the two global ingest knobs. Defaults match the
// documented long-format schema: meter_id,timestamp,kw,volts[,phase][,service_voltage].
struct CsvSchema {
    std::string meter_col = "meter_id";
    std::string time_col = "timestamp";
    std::string kw_col = "kw";
    std::string volt_col = "volts";
    std::string phase_col = "phase";
    std::string service_col = "service_voltage";
    double delta_t_minutes = 15.0;
    double max_missing = 0.80;
};

// Parse a key = value config file (# starts a comment). Unknown keys are a
// ConfigError so typos do not silently fall back to defaults.
CsvSchema load_schema_config(const std::string& path);

// Load a long-format CSV onto one unified timestamp axis. Rows absent for a
// (meter,timestamp) become explicit gaps. Duplicate (meter,timestamp) rows,
// off-grid timestamps, unparseable fields and empty files are InputErrors.
FeederDataset load_meter_csv(const std::string& path, const CsvSchema& schema = {});

// Inverse of load_meter_csv: write the long-format CSV, omitting rows for
// missing samples. Doubles are written shortest-round-trip so a
// load/write/load cycle is lossless. A non-empty header is emitted as a
// leading comment line (readers skip '#' lines).
void write_meter_csv(const FeederDataset& ds, const std::string& path,
                     const std::string& artifact_header = "");

// Remove meters whose missing fraction exceeds max_missing. Retained meters
// are copied unchanged. Removed ids are appended to *removed when given.
FeederDataset drop_sparse_meters(const FeederDataset& ds, double max_missing,
                                 std::vector<std::string>* removed = nullptr);

struct NormalizeReport {
    std::size_t outlier_count = 0;  // p.u. values outside (0.5, 1.5)
};

// Divide each meter's voltage by its service voltage; gaps are preserved.
// A meter without service_voltage is a ConfigError naming the meter.
FeederDataset normalize_voltages(const FeederDataset& ds, NormalizeReport* report = nullptr);

// Optional per-meter phase-label overrides (the field-corrections file):
// CSV with header meter_id,phase. Unknown meter ids are an InputError.
std::map<std::string, Phase> load_phase_file(const std::string& path);

}  // namespace phaseid

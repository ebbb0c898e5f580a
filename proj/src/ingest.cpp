#include "phaseid/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "phaseid/errors.hpp"

namespace phaseid {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct RawRow {
    std::uint32_t meter = 0;
    std::int64_t ts = 0;
    double kw = 0.0;
    double volts = 0.0;
};

}  // namespace

CsvSchema load_schema_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema config: " + path);
    CsvSchema schema;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "meter_col") schema.meter_col = value;
        else if (key == "time_col") schema.time_col = value;
        else if (key == "kw_col") schema.kw_col = value;
        else if (key == "volt_col") schema.volt_col = value;
        else if (key == "phase_col") schema.phase_col = value;
        else if (key == "service_col") schema.service_col = value;
        else if (key == "delta_t_minutes") {
            auto v = parse_double(value);
            if (!v || *v <= 0) throw ConfigError("schema config: bad delta_t_minutes: " + value);
            schema.delta_t_minutes = *v;
        } else if (key == "max_missing") {
            auto v = parse_double(value);
            if (!v || *v < 0 || *v > 1) throw ConfigError("schema config: bad max_missing: " + value);
            schema.max_missing = *v;
        } else {
            throw ConfigError("schema config line " + std::to_string(lineno) + ": unknown key '" +
                              key + "'");
        }
    }
    return schema;
}

FeederDataset load_meter_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input CSV: " + path);

    std::string line;
    std::size_t lineno = 0;
    // Header (skip artifact comment lines).
    do {
        if (!std::getline(in, line)) throw InputError("empty input file: " + path);
        ++lineno;
    } while (!line.empty() && line[0] == '#');

    auto header = split_csv(line);
    auto col_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int c_meter = col_of(schema.meter_col);
    int c_time = col_of(schema.time_col);
    int c_kw = col_of(schema.kw_col);
    int c_volt = col_of(schema.volt_col);
    int c_phase = col_of(schema.phase_col);
    int c_service = col_of(schema.service_col);
    if (c_meter < 0 || c_time < 0 || c_kw < 0 || c_volt < 0)
        throw InputError("input CSV is missing required columns (need " + schema.meter_col + "," +
                         schema.time_col + "," + schema.kw_col + "," + schema.volt_col + "): " +
                         path);

    std::vector<RawRow> rows;
    std::unordered_map<std::string, std::uint32_t> meter_index;
    std::vector<std::string> meter_ids;
    std::vector<std::optional<Phase>> phases;
    std::vector<std::optional<double>> services;
    bool any_row = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        any_row = true;
        auto fields = split_csv(line);
        auto field = [&](int c) -> std::string {
            return c >= 0 && static_cast<std::size_t>(c) < fields.size() ? fields[c] : std::string();
        };
        std::string id = field(c_meter);
        if (id.empty()) throw InputError("row " + std::to_string(lineno) + ": empty meter id");
        auto ts = parse_iso8601(field(c_time));
        if (!ts)
            throw InputError("row " + std::to_string(lineno) + ": unparseable timestamp '" +
                             field(c_time) + "'");

        std::uint32_t mi;
        auto it = meter_index.find(id);
        if (it == meter_index.end()) {
            mi = static_cast<std::uint32_t>(meter_ids.size());
            meter_index.emplace(id, mi);
            meter_ids.push_back(id);
            phases.emplace_back();
            services.emplace_back();
        } else {
            mi = it->second;
        }

        RawRow row;
        row.meter = mi;
        row.ts = *ts;
        auto kw = parse_double(field(c_kw));
        auto volts = parse_double(field(c_volt));
        if (!field(c_kw).empty() && !kw)
            throw InputError("row " + std::to_string(lineno) + ": bad kW value '" + field(c_kw) + "'");
        if (!field(c_volt).empty() && !volts)
            throw InputError("row " + std::to_string(lineno) + ": bad voltage value '" +
                             field(c_volt) + "'");
        row.kw = kw ? *kw : missing_value();
        row.volts = volts ? *volts : missing_value();
        rows.push_back(row);

        std::string ph = field(c_phase);
        if (!ph.empty()) {
            auto p = ph.size() == 1 ? phase_from_char(ph[0]) : std::nullopt;
            if (!p)
                throw InputError("row " + std::to_string(lineno) + ": phase label '" + ph +
                                 "' is not one of A,B,C");
            if (phases[mi] && *phases[mi] != *p)
                throw InputError("row " + std::to_string(lineno) + ": meter " + id +
                                 " has conflicting phase labels");
            phases[mi] = p;
        }
        std::string sv = field(c_service);
        if (!sv.empty()) {
            auto v = parse_double(sv);
            if (!v || *v <= 0)
                throw InputError("row " + std::to_string(lineno) + ": bad service voltage '" + sv +
                                 "'");
            if (services[mi] && *services[mi] != *v)
                throw InputError("row " + std::to_string(lineno) + ": meter " + id +
                                 " has conflicting service voltages");
            services[mi] = v;
        }
    }
    if (!any_row) throw InputError("input CSV has a header but no data rows: " + path);

    // Unified axis: [min,max] at the configured spacing; every timestamp
    // must land on the grid.
    std::int64_t step = static_cast<std::int64_t>(schema.delta_t_minutes * 60.0);
    if (step <= 0) throw ConfigError("delta_t_minutes must be positive");
    std::int64_t t_min = rows.front().ts, t_max = rows.front().ts;
    for (const auto& r : rows) {
        t_min = std::min(t_min, r.ts);
        t_max = std::max(t_max, r.ts);
    }
    for (const auto& r : rows) {
        if ((r.ts - t_min) % step != 0)
            throw InputError("timestamp " + format_iso8601(r.ts) + " of meter " +
                             meter_ids[r.meter] + " is off the " +
                             format_double(schema.delta_t_minutes) + "-minute grid");
    }

    FeederDataset ds;
    ds.delta_t_minutes = schema.delta_t_minutes;
    std::size_t t_count = static_cast<std::size_t>((t_max - t_min) / step) + 1;
    ds.timestamps.reserve(t_count);
    for (std::size_t t = 0; t < t_count; ++t)
        ds.timestamps.push_back(t_min + static_cast<std::int64_t>(t) * step);

    ds.meters.resize(meter_ids.size());
    for (std::size_t m = 0; m < meter_ids.size(); ++m) {
        ds.meters[m].meter_id = meter_ids[m];
        ds.meters[m].recorded_phase = phases[m];
        ds.meters[m].service_voltage = services[m];
        ds.meters[m].power_kw.assign(t_count, missing_value());
        ds.meters[m].voltage.assign(t_count, missing_value());
    }
    std::vector<bool> seen(meter_ids.size() * t_count, false);
    for (const auto& r : rows) {
        std::size_t t = static_cast<std::size_t>((r.ts - t_min) / step);
        std::size_t slot = r.meter * t_count + t;
        if (seen[slot])
            throw InputError("duplicate sample for meter " + meter_ids[r.meter] + " at " +
                             format_iso8601(r.ts));
        seen[slot] = true;
        ds.meters[r.meter].power_kw[t] = r.kw;
        ds.meters[r.meter].voltage[t] = r.volts;
    }
    return ds;
}

void write_meter_csv(const FeederDataset& ds, const std::string& path,
                     const std::string& artifact_header) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write CSV: " + path);
    if (!artifact_header.empty()) out << artifact_header << "\n";
    bool any_phase = false, any_service = false;
    for (const auto& m : ds.meters) {
        any_phase |= m.recorded_phase.has_value();
        any_service |= m.service_voltage.has_value();
    }
    out << "meter_id,timestamp,kw,volts";
    if (any_phase) out << ",phase";
    if (any_service) out << ",service_voltage";
    out << "\n";
    for (const auto& m : ds.meters) {
        for (std::size_t t = 0; t < ds.timestamps.size(); ++t) {
            bool kw_missing = is_missing(m.power_kw[t]);
            bool v_missing = is_missing(m.voltage[t]);
            if (kw_missing && v_missing) continue;  // gap: no row
            out << m.meter_id << ',' << format_iso8601(ds.timestamps[t]) << ',';
            if (!kw_missing) out << format_double(m.power_kw[t]);
            out << ',';
            if (!v_missing) out << format_double(m.voltage[t]);
            if (any_phase) {
                out << ',';
                if (m.recorded_phase) out << phase_char(*m.recorded_phase);
            }
            if (any_service) {
                out << ',';
                if (m.service_voltage) out << format_double(*m.service_voltage);
            }
            out << "\n";
        }
    }
}

FeederDataset drop_sparse_meters(const FeederDataset& ds, double max_missing,
                                 std::vector<std::string>* removed) {
    if (max_missing < 0.0 || max_missing > 1.0)
        throw ConfigError("max_missing must be in [0,1]");
    FeederDataset out;
    out.timestamps = ds.timestamps;
    out.delta_t_minutes = ds.delta_t_minutes;
    out.normalized = ds.normalized;
    for (const auto& m : ds.meters) {
        if (m.missing_fraction() <= max_missing) {
            out.meters.push_back(m);
        } else if (removed) {
            removed->push_back(m.meter_id);
        }
    }
    return out;
}

FeederDataset normalize_voltages(const FeederDataset& ds, NormalizeReport* report) {
    FeederDataset out = ds;
    std::size_t outliers = 0;
    for (auto& m : out.meters) {
        if (!m.service_voltage || *m.service_voltage <= 0.0)
            throw ConfigError("meter " + m.meter_id + " has no service voltage; cannot normalize");
        double sv = *m.service_voltage;
        for (auto& v : m.voltage) {
            if (is_missing(v)) continue;
            v /= sv;
            if (v <= 0.5 || v >= 1.5) ++outliers;
        }
    }
    out.normalized = true;
    if (report) report->outlier_count = outliers;
    return out;
}

std::map<std::string, Phase> load_phase_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open phase file: " + path);
    std::map<std::string, Phase> out;
    std::string line;
    std::size_t lineno = 0;
    int id_col = 0, phase_col = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (first) {
            first = false;
            // Accept either a header or headerless two-column data.
            bool header = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "meter_id") { id_col = static_cast<int>(i); header = true; }
                if (fields[i] == "phase") { phase_col = static_cast<int>(i); }
            }
            if (header) continue;
        }
        if (fields.size() < 2)
            throw InputError("phase file row " + std::to_string(lineno) + ": need meter_id,phase");
        const std::string& id = fields[static_cast<std::size_t>(id_col)];
        const std::string& ph = fields[static_cast<std::size_t>(phase_col)];
        auto p = ph.size() == 1 ? phase_from_char(ph[0]) : std::nullopt;
        if (!p)
            throw InputError("phase file row " + std::to_string(lineno) + ": phase '" + ph +
                             "' is not one of A,B,C");
        out[id] = *p;
    }
    if (out.empty()) throw InputError("phase file has no entries: " + path);
    return out;
}

}  // namespace phaseid

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace phaseid {

// Missing samples are explicit quiet-NaN holes on the shared timestamp axis.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

enum class Phase : std::uint8_t { A = 0, B = 1, C = 2 };

inline char phase_char(Phase p) { return p == Phase::A ? 'A' : (p == Phase::B ? 'B' : 'C'); }

inline std::optional<Phase> phase_from_char(char c) {
    switch (c) {
        case 'A': case 'a': return Phase::A;
        case 'B': case 'b': return Phase::B;
        case 'C': case 'c': return Phase::C;
        default: return std::nullopt;
    }
}

// One meter's aligned kW / voltage series on the dataset's timestamp axis.
struct MeterSeries {
    std::string meter_id;
    std::vector<double> power_kw;  // NaN = missing sample
    std::vector<double> voltage;   // volts before normalization, p.u. after
    std::optional<Phase> recorded_phase;
    std::optional<double> service_voltage;

    // A sample is missing when either channel is absent at that timestamp.
    std::size_t missing_count() const {
        std::size_t n = 0;
        for (std::size_t t = 0; t < power_kw.size(); ++t)
            if (is_missing(power_kw[t]) || is_missing(voltage[t])) ++n;
        return n;
    }

    double missing_fraction() const {
        return power_kw.empty() ? 0.0
                                : static_cast<double>(missing_count()) / power_kw.size();
    }
};

// All meters of one feeder on a shared, uniformly spaced timestamp axis.
struct FeederDataset {
    std::vector<std::int64_t> timestamps;  // epoch seconds, constant spacing
    double delta_t_minutes = 15.0;
    std::vector<MeterSeries> meters;
    bool normalized = false;  // voltages divided by service voltage

    std::size_t meter_count() const { return meters.size(); }
    std::size_t sample_count() const { return timestamps.size(); }

    std::size_t gap_count() const {
        std::size_t n = 0;
        for (const auto& m : meters) n += m.missing_count();
        return n;
    }

    int find_meter(const std::string& id) const {
        for (std::size_t i = 0; i < meters.size(); ++i)
            if (meters[i].meter_id == id) return static_cast<int>(i);
        return -1;
    }
};

// ISO-8601 helpers ("YYYY-MM-DDTHH:MM:SS", 'T' or ' ' separator, optional 'Z').
// Returns nullopt on anything unparseable.
std::optional<std::int64_t> parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace phaseid

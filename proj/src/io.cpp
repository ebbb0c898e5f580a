#include "phaseid/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "phaseid/errors.hpp"

namespace phaseid {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

struct Fnv {
    std::uint64_t h = kFnvOffset;
    void bytes(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= kFnvPrime;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
};

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

constexpr std::uint32_t kCacheMagic = 0x50484944;  // "PHID"
constexpr std::uint32_t kCacheVersion = 2;

}  // namespace

std::uint64_t dataset_fingerprint(const FeederDataset& ds) {
    Fnv f;
    f.f64(ds.delta_t_minutes);
    f.u64(ds.timestamps.size());
    for (auto t : ds.timestamps) f.u64(static_cast<std::uint64_t>(t));
    f.u64(ds.meters.size());
    for (const auto& m : ds.meters) {
        f.str(m.meter_id);
        for (double v : m.power_kw) f.f64(v);
        for (double v : m.voltage) f.f64(v);
    }
    return f.h;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& ids,
                      const std::vector<double>& values, std::size_t n,
                      const std::string& artifact_header) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write matrix CSV: " + path);
    if (!artifact_header.empty()) out << artifact_header << "\n";
    out << "meter_id";
    for (const auto& id : ids) out << ',' << id;
    out << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << ids[i];
        for (std::size_t j = 0; j < n; ++j) out << ',' << format_double(values[i * n + j]);
        out << "\n";
    }
}

std::string cache_file_name(std::uint64_t fingerprint, const SegmentParams& params,
                            std::size_t min_pcc_samples) {
    Fnv f;
    f.u64(fingerprint);
    f.f64(params.c_threshold_kw);
    f.f64(params.t_dur_hours);
    f.f64(params.delta_t_minutes);
    f.u64(min_pcc_samples);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "dist_%016llx.phid", static_cast<unsigned long long>(f.h));
    return buf;
}

void save_matrix_cache(const DistanceMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write matrix cache: " + path);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(kCacheMagic);
    put_u32(kCacheVersion);
    put_u64(m.n);
    for (const auto& id : m.meter_ids) {
        put_u64(id.size());
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    out.write(reinterpret_cast<const char*>(m.dist.data()),
              static_cast<std::streamsize>(m.dist.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(m.pcc.data()),
              static_cast<std::streamsize>(m.pcc.size() * sizeof(double)));
    for (const auto& meta : m.meta) {
        put_u32(meta.total_points);
        put_u32(static_cast<std::uint32_t>(meta.fallback_used) |
                (static_cast<std::uint32_t>(meta.degenerate) << 1));
    }
}

std::optional<DistanceMatrix> load_matrix_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    auto get_u32 = [&]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&]() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    if (get_u32() != kCacheMagic || get_u32() != kCacheVersion) return std::nullopt;
    DistanceMatrix m;
    m.n = get_u64();
    if (!in || m.n == 0 || m.n > (1u << 20)) return std::nullopt;
    m.meter_ids.resize(m.n);
    for (auto& id : m.meter_ids) {
        std::uint64_t len = get_u64();
        if (!in || len > (1u << 16)) return std::nullopt;
        id.resize(len);
        in.read(id.data(), static_cast<std::streamsize>(len));
    }
    m.dist.resize(m.n * m.n);
    m.pcc.resize(m.n * m.n);
    m.meta.resize(m.n * m.n);
    in.read(reinterpret_cast<char*>(m.dist.data()),
            static_cast<std::streamsize>(m.dist.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(m.pcc.data()),
            static_cast<std::streamsize>(m.pcc.size() * sizeof(double)));
    for (auto& meta : m.meta) {
        meta.total_points = get_u32();
        std::uint32_t flags = get_u32();
        meta.fallback_used = flags & 1;
        meta.degenerate = flags & 2;
    }
    if (!in) return std::nullopt;
    return m;
}

DistanceMatrix cached_distance_matrix(const FeederDataset& ds, const SegmentParams& params,
                                      const CorrelationOptions& options,
                                      const std::string& cache_dir) {
    if (cache_dir.empty()) return pairwise_distance_matrix(ds, params, options);
    namespace fs = std::filesystem;
    fs::create_directories(cache_dir);
    fs::path file = fs::path(cache_dir) /
                    cache_file_name(dataset_fingerprint(ds), params, options.min_pcc_samples);
    if (auto cached = load_matrix_cache(file.string()); cached && cached->n == ds.meter_count())
        return *cached;
    DistanceMatrix m = pairwise_distance_matrix(ds, params, options);
    save_matrix_cache(m, file.string());
    return m;
}

}  // namespace phaseid

#include "phaseid/dataset.hpp"

#include <cstdio>

namespace phaseid {

namespace {

// Days since 1970-01-01 for a civil date (Gregorian, proleptic).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
    // YYYY-MM-DD[T ]HH:MM[:SS][Z]
    const char* s = text.c_str();
    std::size_t len = text.size();
    if (len >= 1 && s[len - 1] == 'Z') --len;
    if (len < 16) return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t digits) -> int {
        int v = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            if (!is_digit(s[pos + i])) return -1;
            v = v * 10 + (s[pos + i] - '0');
        }
        return v;
    };
    int year = num(0, 4);
    int month = num(5, 2);
    int day = num(8, 2);
    int hour = num(11, 2);
    int minute = num(14, 2);
    int second = 0;
    if (year < 0 || month < 0 || day < 0 || hour < 0 || minute < 0) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        return std::nullopt;
    if (len >= 19) {
        if (s[16] != ':') return std::nullopt;
        second = num(17, 2);
        if (second < 0) return std::nullopt;
    } else if (len != 16) {
        return std::nullopt;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        return std::nullopt;
    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                        static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t sod = epoch_seconds % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld", y, m, d,
                  static_cast<long long>(sod / 3600), static_cast<long long>((sod % 3600) / 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

}  // namespace phaseid

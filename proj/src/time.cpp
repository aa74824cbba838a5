#include "sdcd/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace sdcd {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}

bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

std::optional<unix_time_t> parse_rfc3339(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS[.frac][Z|+HH:MM|-HH:MM]
    int Y, M, D, h, m, sec;
    if (s.size() < 19) return std::nullopt;
    if (!parse_uint(s, 0, 4, Y) || s[4] != '-' || !parse_uint(s, 5, 2, M) || s[7] != '-' ||
        !parse_uint(s, 8, 2, D))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!parse_uint(s, 11, 2, h) || s[13] != ':' || !parse_uint(s, 14, 2, m) || s[16] != ':' ||
        !parse_uint(s, 17, 2, sec))
        return std::nullopt;
    if (M < 1 || M > 12 || D < 1 || D > 31 || h > 23 || m > 59 || sec > 60) return std::nullopt;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            ++pos;
            ++digits;
        }
        if (digits == 0) return std::nullopt;
    }

    std::int64_t offset = 0;
    if (pos == s.size()) return std::nullopt;  // offset designator required
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
        if (pos + 1 != s.size()) return std::nullopt;
    } else if (c == '+' || c == '-') {
        int oh, om;
        if (!parse_uint(s, pos + 1, 2, oh)) return std::nullopt;
        std::size_t mpos = pos + 3;
        if (mpos < s.size() && s[mpos] == ':') ++mpos;
        if (!parse_uint(s, mpos, 2, om) || mpos + 2 != s.size()) return std::nullopt;
        offset = (oh * 3600 + om * 60) * (c == '-' ? -1 : 1);
    } else {
        return std::nullopt;
    }

    const std::int64_t days = days_from_civil(Y, static_cast<unsigned>(M), static_cast<unsigned>(D));
    return days * kSecondsPerDay + h * 3600 + m * 60 + sec - offset;
}

std::string format_rfc3339_utc(unix_time_t t) {
    const std::int64_t days = floor_div(t, kSecondsPerDay);
    const std::int64_t rem = floor_mod(t, kSecondsPerDay);
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::optional<std::int64_t> parse_civil_date(std::string_view s) {
    int Y, M, D;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!parse_uint(s, 0, 4, Y) || !parse_uint(s, 5, 2, M) || !parse_uint(s, 8, 2, D))
        return std::nullopt;
    if (M < 1 || M > 12 || D < 1 || D > 31) return std::nullopt;
    return days_from_civil(Y, static_cast<unsigned>(M), static_cast<unsigned>(D));
}

std::string format_civil_date(std::int64_t days) {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::optional<Timezone> Timezone::parse(std::string_view token) {
    Timezone tz;
    if (token.empty() || token == "UTC" || token == "utc" || token == "Z") {
        return tz;
    }
    std::string_view rest = token;
    if (rest.rfind("UTC", 0) == 0) rest.remove_prefix(3);
    if (rest.empty()) return tz;
    if (rest[0] != '+' && rest[0] != '-') return std::nullopt;
    const int sign = rest[0] == '-' ? -1 : 1;
    rest.remove_prefix(1);
    int oh = 0, om = 0;
    if (rest.size() == 1 || rest.size() == 2) {  // "+H" / "+HH"
        for (char c : rest) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            oh = oh * 10 + (c - '0');
        }
    } else if (rest.size() == 5 && rest[2] == ':') {  // "+HH:MM"
        if (!parse_uint(rest, 0, 2, oh) || !parse_uint(rest, 3, 2, om)) return std::nullopt;
    } else if (rest.size() == 4) {  // "+HHMM"
        if (!parse_uint(rest, 0, 2, oh) || !parse_uint(rest, 2, 2, om)) return std::nullopt;
    } else {
        return std::nullopt;
    }
    if (oh > 14 || om > 59) return std::nullopt;
    tz.offset_s_ = sign * (oh * 3600 + om * 60);
    tz.name_ = std::string(token);
    return tz;
}

int Timezone::hour_of_day(unix_time_t t) const {
    return static_cast<int>(floor_mod(t + offset_s_, kSecondsPerDay) / kSecondsPerHour);
}

std::int64_t Timezone::local_days(unix_time_t t) const {
    return floor_div(t + offset_s_, kSecondsPerDay);
}

std::string Timezone::local_date(unix_time_t t) const {
    return format_civil_date(local_days(t));
}

std::string Timezone::service_date(unix_time_t t) const {
    return format_civil_date(local_days(t - 3 * kSecondsPerHour));
}

}  // namespace sdcd

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sdcd {

// Seconds since the Unix epoch, UTC. All stream timestamps use this.
using unix_time_t = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerHour = 3600;

// Days-from-civil / civil-from-days (proleptic Gregorian).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

// Parses an RFC 3339 timestamp ("2021-12-18T08:15:30Z", optional fractional
// seconds and numeric offsets). Fractional seconds are truncated toward zero.
std::optional<unix_time_t> parse_rfc3339(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339_utc(unix_time_t t);

// Parses "YYYY-MM-DD" into a day count since the epoch.
std::optional<std::int64_t> parse_civil_date(std::string_view text);
std::string format_civil_date(std::int64_t days_since_epoch);

// Run-level timezone used for hour-of-day and calendar-day bucketing.
// Supports "UTC", "Z" and fixed offsets ("UTC+01:00", "+02:00", "-0530").
// Named IANA zones other than UTC are rejected: the toolchain here ships no
// tz database, so offsets are the portable subset.
class Timezone {
public:
    Timezone() = default;

    static std::optional<Timezone> parse(std::string_view token);
    static Timezone utc() { return Timezone{}; }

    std::int64_t offset_seconds() const { return offset_s_; }
    const std::string& name() const { return name_; }

    int hour_of_day(unix_time_t t) const;
    // Local calendar date as days since epoch.
    std::int64_t local_days(unix_time_t t) const;
    std::string local_date(unix_time_t t) const;
    // Service day: local date of (t - 3h), so late-night courses stay with
    // the day they were scheduled on.
    std::string service_date(unix_time_t t) const;

    bool operator==(const Timezone&) const = default;

private:
    std::int64_t offset_s_ = 0;
    std::string name_ = "UTC";
};

}  // namespace sdcd

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdcd/model.hpp"
#include "sdcd/time.hpp"

namespace sdcd {

// Raised for unreadable or structurally broken input files.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ServiceStatus { InService, NotInService };

// One line of a snapshot file, before schedule joining.
struct RawLocationRecord {
    unix_time_t event_time = 0;
    std::string vehicle;
    std::string line;
    std::string course;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<StopId> curr_stop;
    std::optional<StopId> prev_stop;
    std::optional<unix_time_t> real_dep_curr;
    std::optional<unix_time_t> real_dep_prev;
    ServiceStatus status = ServiceStatus::InService;
};

// One scheduled departure. (course, stop) is unique within a service day.
struct ScheduleEntry {
    std::string line;
    std::string course;
    StopId stop;
    unix_time_t sched_departure = 0;
    std::string service_date;  // YYYY-MM-DD
};

// Indexed static schedule for joining.
class Schedule {
public:
    void add(const ScheduleEntry& entry);
    std::optional<unix_time_t> lookup(const std::string& service_date, const std::string& course,
                                      const StopId& stop) const;
    std::size_t size() const { return entries_.size(); }

    static Schedule load_csv(const std::string& path);

private:
    std::unordered_map<std::string, unix_time_t> entries_;  // "date|course|stop"
};

struct IngestStats {
    std::uint64_t total = 0;
    std::uint64_t linked = 0;
    std::uint64_t skipped_not_in_service = 0;
    std::uint64_t skipped_unusable = 0;  // unparseable, unlinked, or invalid
};

struct BoundingBox {
    double min_lat = -90.0, max_lat = 90.0;
    double min_lon = -180.0, max_lon = 180.0;

    bool contains(double lat, double lon) const {
        return lat >= min_lat && lat <= max_lat && lon >= min_lon && lon <= max_lon;
    }
};

struct ReplayConfig {
    Timezone tz = Timezone::utc();  // service-day derivation for the join
    BoundingBox bbox{};
};

// Streams schedule-linked, in-service snapshots out of a snapshot file.
// Records that cannot be used are counted, never yielded. Real departure
// times come from the record; scheduled ones are joined on
// (service day, course, stop).
class SnapshotReader {
public:
    SnapshotReader(const std::string& path, const Schedule& schedule, ReplayConfig config = {});
    ~SnapshotReader();
    SnapshotReader(SnapshotReader&&) noexcept;
    SnapshotReader& operator=(SnapshotReader&&) noexcept;

    std::optional<VehicleSnapshot> next();
    const IngestStats& stats() const { return stats_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    IngestStats stats_;
};

// Convenience: drains the reader. Returns the snapshots plus final stats.
std::pair<std::vector<VehicleSnapshot>, IngestStats> replay(const std::string& path,
                                                            const Schedule& schedule,
                                                            ReplayConfig config = {});

// Snapshot/schedule CSV writers (the formats SnapshotReader and
// Schedule::load_csv read back).
void write_snapshots_csv(std::ostream& out, const std::vector<VehicleSnapshot>& snapshots);
void write_snapshots_csv_file(const std::string& path, const std::vector<VehicleSnapshot>& snapshots);
void write_schedule_csv(std::ostream& out, const std::vector<ScheduleEntry>& entries);
void write_schedule_csv_file(const std::string& path, const std::vector<ScheduleEntry>& entries);

// Minimal CSV helpers shared by the readers/writers. Fields are opaque
// tokens; separators inside fields are rejected at write time rather than
// quoted.
void split_csv_line(std::string_view line, std::vector<std::string_view>& out);
void require_csv_safe(std::string_view field);

}  // namespace sdcd

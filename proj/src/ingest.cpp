#include "sdcd/ingest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdcd {

namespace {

constexpr std::string_view kSnapshotHeader =
    "event_time,vehicle,line,course,lat,lon,curr_stop,prev_stop,real_dep_curr,real_dep_prev,"
    "status";
constexpr std::string_view kScheduleHeader = "line,course,stop,sched_departure,service_date";

std::optional<double> parse_double(std::string_view s) {
    double v;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return v;
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_opt_time(const std::optional<unix_time_t>& t) {
    return t ? format_rfc3339_utc(*t) : std::string{};
}

}  // namespace

void split_csv_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void require_csv_safe(std::string_view field) {
    if (field.find_first_of(",\"\n\r") != std::string_view::npos) {
        throw InputError("field contains a CSV separator: '" + std::string(field) + "'");
    }
}

void Schedule::add(const ScheduleEntry& entry) {
    std::string key = entry.service_date;
    key += '|';
    key += entry.course;
    key += '|';
    key += entry.stop;
    entries_.emplace(std::move(key), entry.sched_departure);  // first entry wins
}

std::optional<unix_time_t> Schedule::lookup(const std::string& service_date,
                                            const std::string& course, const StopId& stop) const {
    std::string key = service_date;
    key += '|';
    key += course;
    key += '|';
    key += stop;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Schedule Schedule::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open schedule file: " + path);
    Schedule schedule;
    std::string line;
    std::vector<std::string_view> fields;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == kScheduleHeader) continue;
        }
        split_csv_line(line, fields);
        if (fields.size() != 5) throw InputError("schedule row needs 5 fields: " + line);
        const auto dep = parse_rfc3339(fields[3]);
        if (!dep) throw InputError("bad sched_departure in schedule row: " + line);
        if (!parse_civil_date(fields[4])) throw InputError("bad service_date in schedule row: " + line);
        ScheduleEntry e;
        e.line = std::string(fields[0]);
        e.course = std::string(fields[1]);
        e.stop = std::string(fields[2]);
        e.sched_departure = *dep;
        e.service_date = std::string(fields[4]);
        schedule.add(e);
    }
    return schedule;
}

struct SnapshotReader::Impl {
    std::ifstream in;
    const Schedule* schedule = nullptr;
    ReplayConfig config;
    std::string line;
    std::vector<std::string_view> fields;
    bool header_checked = false;
};

SnapshotReader::SnapshotReader(const std::string& path, const Schedule& schedule,
                               ReplayConfig config)
    : impl_(std::make_unique<Impl>()) {
    impl_->in.open(path);
    if (!impl_->in) throw InputError("cannot open snapshot file: " + path);
    impl_->schedule = &schedule;
    impl_->config = config;
}

SnapshotReader::~SnapshotReader() = default;
SnapshotReader::SnapshotReader(SnapshotReader&&) noexcept = default;
SnapshotReader& SnapshotReader::operator=(SnapshotReader&&) noexcept = default;

std::optional<VehicleSnapshot> SnapshotReader::next() {
    auto& im = *impl_;
    while (std::getline(im.in, im.line)) {
        if (!im.line.empty() && im.line.back() == '\r') im.line.pop_back();
        if (im.line.empty()) continue;
        if (!im.header_checked) {
            im.header_checked = true;
            if (im.line == kSnapshotHeader) continue;
        }
        ++stats_.total;
        split_csv_line(im.line, im.fields);
        if (im.fields.size() != 11) {
            ++stats_.skipped_unusable;
            continue;
        }
        const auto& f = im.fields;
        const auto event_time = parse_rfc3339(f[0]);
        if (!event_time) {
            ++stats_.skipped_unusable;
            continue;
        }
        if (f[10] == "NOT_IN_SERVICE") {
            ++stats_.skipped_not_in_service;
            continue;
        }
        if (f[10] != "IN_SERVICE") {
            ++stats_.skipped_unusable;
            continue;
        }
        const auto lat = parse_double(f[4]);
        const auto lon = parse_double(f[5]);
        if (!lat || !lon || !im.config.bbox.contains(*lat, *lon)) {
            ++stats_.skipped_unusable;
            continue;
        }
        if (f[6].empty() || f[7].empty() || f[6] == f[7]) {
            ++stats_.skipped_unusable;
            continue;
        }
        const auto real_curr = parse_rfc3339(f[8]);
        if (!real_curr) {
            ++stats_.skipped_unusable;  // no departure to compare against
            continue;
        }
        VehicleSnapshot s;
        s.event_time = *event_time;
        s.vehicle = std::string(f[1]);
        s.line = std::string(f[2]);
        s.course = std::string(f[3]);
        s.lat = *lat;
        s.lon = *lon;
        s.curr_stop = std::string(f[6]);
        s.prev_stop = std::string(f[7]);
        s.real_dep_curr = real_curr;
        if (!f[9].empty()) s.real_dep_prev = parse_rfc3339(f[9]);

        const std::string day_curr = im.config.tz.service_date(*real_curr);
        s.sched_dep_curr = im.schedule->lookup(day_curr, s.course, s.curr_stop);
        if (!s.sched_dep_curr) {
            ++stats_.skipped_unusable;  // unlinked
            continue;
        }
        if (s.real_dep_prev) {
            const std::string day_prev = im.config.tz.service_date(*s.real_dep_prev);
            s.sched_dep_prev = im.schedule->lookup(day_prev, s.course, s.prev_stop);
        }
        if (!is_structurally_valid(s)) {
            ++stats_.skipped_unusable;
            continue;
        }
        ++stats_.linked;
        return s;
    }
    return std::nullopt;
}

std::pair<std::vector<VehicleSnapshot>, IngestStats> replay(const std::string& path,
                                                            const Schedule& schedule,
                                                            ReplayConfig config) {
    SnapshotReader reader(path, schedule, config);
    std::vector<VehicleSnapshot> out;
    while (auto s = reader.next()) out.push_back(std::move(*s));
    return {std::move(out), reader.stats()};
}

void write_snapshots_csv(std::ostream& out, const std::vector<VehicleSnapshot>& snapshots) {
    out << kSnapshotHeader << '\n';
    for (const auto& s : snapshots) {
        for (const auto* tok : {&s.vehicle, &s.line, &s.course, &s.curr_stop, &s.prev_stop}) {
            require_csv_safe(*tok);
        }
        out << format_rfc3339_utc(s.event_time) << ',' << s.vehicle << ',' << s.line << ','
            << s.course << ',' << format_coord(s.lat) << ',' << format_coord(s.lon) << ','
            << s.curr_stop << ',' << s.prev_stop << ',' << format_opt_time(s.real_dep_curr) << ','
            << format_opt_time(s.real_dep_prev) << ','
            << (s.in_service ? "IN_SERVICE" : "NOT_IN_SERVICE") << '\n';
    }
}

void write_snapshots_csv_file(const std::string& path,
                              const std::vector<VehicleSnapshot>& snapshots) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write snapshot file: " + path);
    write_snapshots_csv(out, snapshots);
}

void write_schedule_csv(std::ostream& out, const std::vector<ScheduleEntry>& entries) {
    out << kScheduleHeader << '\n';
    for (const auto& e : entries) {
        require_csv_safe(e.line);
        require_csv_safe(e.course);
        require_csv_safe(e.stop);
        out << e.line << ',' << e.course << ',' << e.stop << ','
            << format_rfc3339_utc(e.sched_departure) << ',' << e.service_date << '\n';
    }
}

void write_schedule_csv_file(const std::string& path, const std::vector<ScheduleEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write schedule file: " + path);
    write_schedule_csv(out, entries);
}

}  // namespace sdcd

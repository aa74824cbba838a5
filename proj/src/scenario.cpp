#include "sdcd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace sdcd {

namespace {

double quantize_coord(double v) { return std::round(v * 1e6) / 1e6; }

// Deterministic standard Gaussian: Box-Muller over mt19937_64 draws. The
// standard library's normal_distribution is implementation-defined, which
// would break byte-identical streams across toolchains.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() {
        // 53-bit mantissa in [0,1)
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

std::string stop_token(unsigned i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%04u", i);
    return buf;
}

std::string line_token(unsigned i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "L%02u", i);
    return buf;
}

}  // namespace

bool Perturbation::active_at(unix_time_t t, const Timezone& tz) const {
    if (t < start || t >= end) return false;
    if (kind == PerturbationKind::Step) return true;
    const int from = tz.hour_of_day(start);
    const int to = tz.hour_of_day(end);
    const int h = tz.hour_of_day(t);
    return h >= from && h < to;
}

void ScenarioSpec::validate() const {
    if (stop_count < 2) throw ConfigError("scenario needs at least 2 stops");
    if (explicit_lines.empty()) {
        if (line_count == 0) throw ConfigError("scenario needs at least one line");
        if (stops_per_line < 2) throw ConfigError("stops_per_line must be at least 2");
        if (stops_per_line > stop_count)
            throw ConfigError("stops_per_line cannot exceed stop_count");
    } else {
        for (const auto& line : explicit_lines) {
            if (line.size() < 3)
                throw ConfigError("an explicit line needs at least 2 stops plus the closing stop");
            if (line.front() != line.back())
                throw ConfigError("a line is a loop: first and last stop must match");
            for (std::size_t i = 0; i + 1 < line.size(); ++i) {
                if (line[i] == line[i + 1])
                    throw ConfigError("a line may not visit the same stop twice in a row");
            }
        }
    }
    if (headway_s <= 0) throw ConfigError("headway_s must be positive");
    if (days == 0) throw ConfigError("days must be at least 1");
    if (noise_std_s < 0.0) throw ConfigError("noise_std_s must be non-negative");
    if (service_start_hour < 0 || service_end_hour > 24 || service_start_hour >= service_end_hour)
        throw ConfigError("service hours must satisfy 0 <= start < end <= 24");
    if (base_run_min_s <= 0 || base_run_max_s < base_run_min_s)
        throw ConfigError("base_run_s range must be positive and ordered");
    for (const auto& p : perturbations) {
        if (p.edge.prev == p.edge.curr) throw ConfigError("perturbation edge must join two stops");
        if (p.end <= p.start) throw ConfigError("perturbation interval must be non-empty");
        if (p.kind == PerturbationKind::Hourly) {
            const int from = tz.hour_of_day(p.start);
            const int to = tz.hour_of_day(p.end);
            if (from >= to)
                throw ConfigError("hourly perturbation needs hour_of(start) < hour_of(end)");
        }
    }
}

Scenario generate(const ScenarioSpec& spec) {
    spec.validate();
    Scenario out;

    // Layout: stop names, positions, line loops, per-edge base running times.
    std::mt19937_64 layout_rng(spec.layout_seed);
    auto uniform_int = [&layout_rng](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(layout_rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    std::vector<StopId> stops;
    std::set<StopId> known_stops;
    auto add_stop = [&](const StopId& id) {
        if (known_stops.insert(id).second) {
            const double lat =
                quantize_coord(spec.center_lat - spec.span_deg / 2 +
                               static_cast<double>(layout_rng() >> 11) * 0x1.0p-53 * spec.span_deg);
            const double lon =
                quantize_coord(spec.center_lon - spec.span_deg / 2 +
                               static_cast<double>(layout_rng() >> 11) * 0x1.0p-53 * spec.span_deg);
            out.stop_positions[id] = {lat, lon};
        }
    };

    std::vector<std::vector<StopId>> lines;
    if (!spec.explicit_lines.empty()) {
        lines = spec.explicit_lines;
        for (const auto& line : lines) {
            for (const auto& s : line) add_stop(s);
        }
    } else {
        stops.reserve(spec.stop_count);
        for (unsigned i = 0; i < spec.stop_count; ++i) {
            stops.push_back(stop_token(i));
            add_stop(stops.back());
        }
        for (unsigned l = 0; l < spec.line_count; ++l) {
            std::vector<StopId> pool = stops;
            for (std::size_t i = pool.size(); i > 1; --i) {
                std::swap(pool[i - 1], pool[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
            }
            std::vector<StopId> loop(pool.begin(), pool.begin() + spec.stops_per_line);
            loop.push_back(loop.front());
            lines.push_back(std::move(loop));
        }
    }

    std::map<Edge, std::int64_t> base_run;
    for (const auto& line : lines) {
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            const Edge e{line[i], line[i + 1]};
            if (!base_run.count(e)) {
                base_run[e] = uniform_int(spec.base_run_min_s, spec.base_run_max_s);
            }
        }
    }

    // Perturbation edges must exist on some line (closing edges excluded:
    // they never produce an observation, see below).
    std::set<Edge> observable;
    for (const auto& line : lines) {
        // The final departure of a course happens at the last distinct stop;
        // the closing edge back to the first stop has no departure of its own.
        for (std::size_t i = 0; i + 2 < line.size(); ++i) {
            observable.insert(Edge{line[i], line[i + 1]});
        }
    }
    for (const auto& p : spec.perturbations) {
        if (!observable.count(p.edge)) {
            throw ConfigError("perturbation edge " + p.edge.prev + "->" + p.edge.curr +
                              " is not traversed by any line (generate once without "
                              "perturbations and pick an edge from ground_truth.json)");
        }
    }

    GaussianSource noise(spec.rng_seed);

    for (const auto& s : known_stops) out.graph.stops.insert(s);
    for (const auto& e : observable) out.graph.edges.insert(e);

    out.truth.perturbations = spec.perturbations;
    out.truth.noise_std_s = spec.noise_std_s;

    // Dispatch courses day by day, line by line, slot by slot; this order is
    // part of the deterministic contract.
    for (unsigned day = 0; day < spec.days; ++day) {
        const std::int64_t day_base =
            (spec.start_day + day) * kSecondsPerDay - spec.tz.offset_seconds();
        const unix_time_t window_start = day_base + spec.service_start_hour * kSecondsPerHour;
        const unix_time_t window_end = day_base + spec.service_end_hour * kSecondsPerHour;
        for (unsigned l = 0; l < lines.size(); ++l) {
            const auto& loop = lines[l];
            const std::string line_id = line_token(l);
            unsigned slot = 0;
            for (unix_time_t t0 = window_start; t0 < window_end; t0 += spec.headway_s, ++slot) {
                char course_buf[48];
                std::snprintf(course_buf, sizeof course_buf, "c-%s-d%u-%03u", line_id.c_str(), day,
                              slot);
                const std::string course = course_buf;
                char vehicle_buf[32];
                std::snprintf(vehicle_buf, sizeof vehicle_buf, "v-%s-%03u", line_id.c_str(), slot);
                const std::string vehicle = vehicle_buf;
                const std::string service_date = spec.tz.service_date(t0);

                unix_time_t sched = t0;
                unix_time_t real = t0;
                out.schedule.push_back(
                    ScheduleEntry{line_id, course, loop.front(), sched, service_date});

                // Visit the distinct stops; the closing stop only marks the
                // end of the loop and has no departure of its own.
                for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
                    const Edge e{loop[i - 1], loop[i]};
                    const std::int64_t base = base_run.at(e);
                    std::int64_t wobble = 0;
                    if (spec.noise_std_s > 0.0) {
                        wobble = static_cast<std::int64_t>(
                            std::llround(noise.next() * spec.noise_std_s));
                    }
                    std::int64_t extra = 0;
                    const unix_time_t tentative = real + base + wobble;
                    for (const auto& p : spec.perturbations) {
                        if (p.edge == e && p.active_at(tentative, spec.tz)) {
                            extra += p.added_delay_s;
                        }
                    }
                    std::int64_t travel = base + wobble + extra;
                    if (travel < 1) travel = 1;  // vehicles cannot arrive before departing
                    const unix_time_t prev_sched = sched;
                    const unix_time_t prev_real = real;
                    sched += base;
                    real += travel;
                    out.schedule.push_back(ScheduleEntry{line_id, course, loop[i], sched, service_date});

                    VehicleSnapshot s;
                    s.event_time = real;
                    s.vehicle = vehicle;
                    s.line = line_id;
                    s.course = course;
                    const auto& pos = out.stop_positions.at(loop[i]);
                    s.lat = pos.first;
                    s.lon = pos.second;
                    s.curr_stop = loop[i];
                    s.prev_stop = loop[i - 1];
                    s.real_dep_curr = real;
                    s.sched_dep_curr = sched;
                    s.real_dep_prev = prev_real;
                    s.sched_dep_prev = prev_sched;
                    out.snapshots.push_back(std::move(s));
                    out.truth.edge_observations[loop[i] + "|" + loop[i - 1]] += 1;
                }
            }
        }
    }

    std::stable_sort(out.snapshots.begin(), out.snapshots.end(),
                     [](const VehicleSnapshot& a, const VehicleSnapshot& b) {
                         if (a.event_time != b.event_time) return a.event_time < b.event_time;
                         if (a.course != b.course) return a.course < b.course;
                         return a.curr_stop < b.curr_stop;
                     });
    return out;
}

namespace {

using nlohmann::json;

Perturbation parse_perturbation(const json& j) {
    Perturbation p;
    p.edge.prev = j.at("prev").get<std::string>();
    p.edge.curr = j.at("curr").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "STEP") {
        p.kind = PerturbationKind::Step;
    } else if (kind == "HOURLY") {
        p.kind = PerturbationKind::Hourly;
    } else {
        throw ConfigError("perturbation kind must be STEP or HOURLY");
    }
    const auto start = parse_rfc3339(j.at("start").get<std::string>());
    const auto end = parse_rfc3339(j.at("end").get<std::string>());
    if (!start || !end) throw ConfigError("perturbation start/end must be RFC 3339 timestamps");
    p.start = *start;
    p.end = *end;
    p.added_delay_s = j.at("added_delay_s").get<std::int64_t>();
    return p;
}

}  // namespace

ScenarioSpec parse_scenario_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario spec is not valid JSON: ") + e.what());
    }
    try {
        ScenarioSpec spec;
        if (j.contains("timezone")) {
            const auto tz = Timezone::parse(j["timezone"].get<std::string>());
            if (!tz) throw ConfigError("unsupported timezone in scenario spec");
            spec.tz = *tz;
        }
        spec.rng_seed = j.value("rng_seed", spec.rng_seed);
        spec.layout_seed = j.value("layout_seed", spec.layout_seed);
        spec.stop_count = j.value("stops", spec.stop_count);
        if (j.contains("lines")) {
            if (j["lines"].is_number()) {
                spec.line_count = j["lines"].get<unsigned>();
            } else {
                spec.explicit_lines = j["lines"].get<std::vector<std::vector<StopId>>>();
            }
        }
        spec.stops_per_line = j.value("stops_per_line", spec.stops_per_line);
        spec.headway_s = j.value("headway_s", spec.headway_s);
        spec.days = j.value("days", spec.days);
        spec.noise_std_s = j.value("noise_std_s", spec.noise_std_s);
        if (j.contains("start_date")) {
            const auto day = parse_civil_date(j["start_date"].get<std::string>());
            if (!day) throw ConfigError("start_date must be YYYY-MM-DD");
            spec.start_day = *day;
        }
        spec.service_start_hour = j.value("service_start_hour", spec.service_start_hour);
        spec.service_end_hour = j.value("service_end_hour", spec.service_end_hour);
        spec.center_lat = j.value("center_lat", spec.center_lat);
        spec.center_lon = j.value("center_lon", spec.center_lon);
        spec.span_deg = j.value("span_deg", spec.span_deg);
        if (j.contains("base_run_s")) {
            const auto& range = j["base_run_s"];
            spec.base_run_min_s = range.at(0).get<std::int64_t>();
            spec.base_run_max_s = range.at(1).get<std::int64_t>();
        }
        if (j.contains("perturbations")) {
            for (const auto& pj : j["perturbations"]) {
                spec.perturbations.push_back(parse_perturbation(pj));
            }
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario spec field error: ") + e.what());
    }
}

ScenarioSpec load_scenario_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario spec: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario_spec(text);
}

ScenarioFiles write_scenario(const Scenario& scenario, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    ScenarioFiles files;
    files.snapshots_path = (fs::path(out_dir) / "snapshots.csv").string();
    files.schedule_path = (fs::path(out_dir) / "schedule.csv").string();
    files.ground_truth_path = (fs::path(out_dir) / "ground_truth.json").string();

    write_snapshots_csv_file(files.snapshots_path, scenario.snapshots);
    write_schedule_csv_file(files.schedule_path, scenario.schedule);

    nlohmann::ordered_json truth;
    truth["noise_std_s"] = scenario.truth.noise_std_s;
    truth["perturbations"] = nlohmann::ordered_json::array();
    for (const auto& p : scenario.truth.perturbations) {
        nlohmann::ordered_json pj;
        pj["prev"] = p.edge.prev;
        pj["curr"] = p.edge.curr;
        pj["kind"] = p.kind == PerturbationKind::Step ? "STEP" : "HOURLY";
        pj["start"] = format_rfc3339_utc(p.start);
        pj["end"] = format_rfc3339_utc(p.end);
        pj["added_delay_s"] = p.added_delay_s;
        truth["perturbations"].push_back(std::move(pj));
    }
    truth["edge_observations"] = nlohmann::ordered_json::object();
    for (const auto& [edge, n] : scenario.truth.edge_observations) {
        truth["edge_observations"][edge] = n;
    }
    truth["stop_positions"] = nlohmann::ordered_json::object();
    for (const auto& [stop, pos] : scenario.stop_positions) {
        truth["stop_positions"][stop] = {pos.first, pos.second};
    }

    std::ofstream out(files.ground_truth_path, std::ios::binary);
    if (!out) throw InputError("cannot write ground truth: " + files.ground_truth_path);
    out << truth.dump(2) << '\n';
    return files;
}

}  // namespace sdcd

#include "sdcd/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace sdcd {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDetectionsHeader =
    "seq,event_time,date,hour,key,curr_stop,prev_stop,detector,signal,value_s,pre_mean_s,"
    "post_mean_s,direction,course,lat,lon";

std::string format_fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write output file: " + path);
    out << text;
}

DetectorKind parse_detector_kind(std::string_view s) {
    if (s == "adwin") return DetectorKind::Adwin;
    if (s == "kswin") return DetectorKind::Kswin;
    if (s == "hddm") return DetectorKind::HddmA;
    throw InputError("unknown detector kind in detections file: " + std::string(s));
}

}  // namespace

void RunConfig::validate() const {
    const bool has_replay = source_path.has_value();
    const bool has_synth = spec_path.has_value();
    if (has_replay == has_synth) {
        throw ConfigError("exactly one source is required: --source with --schedule, or --spec");
    }
    if (has_replay && !schedule_path) {
        throw ConfigError("--source needs --schedule for the static timetable");
    }
    if (out_dir.empty()) throw ConfigError("an output directory is required (--out or SDCD_OUT)");
    try {
        detector.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (from_hour.has_value() != to_hour.has_value()) {
        throw ConfigError("--from-hour and --to-hour must be given together");
    }
    if (from_hour && (*from_hour < 0 || *to_hour > 24 || *from_hour >= *to_hour)) {
        throw ConfigError("hour slice must satisfy 0 <= from < to <= 24");
    }
    for (const auto& item : emit) {
        if (item != "detections" && item != "summary" && item != "geojson") {
            throw ConfigError("unknown emit item: " + item);
        }
    }
}

std::string render_detections_csv(const std::vector<DetectionEvent>& events, const Timezone& tz) {
    std::string out{kDetectionsHeader};
    out += '\n';
    for (const auto& ev : events) {
        char hour_buf[8];
        std::snprintf(hour_buf, sizeof hour_buf, "%02d", tz.hour_of_day(ev.event_time));
        out += std::to_string(ev.seq);
        out += ',';
        out += format_rfc3339_utc(ev.event_time);
        out += ',';
        out += tz.local_date(ev.event_time);
        out += ',';
        out += hour_buf;
        out += ',';
        out += ev.key.encode();
        out += ',';
        out += ev.key.curr;
        out += ',';
        out += ev.key.prev;
        out += ',';
        out += to_string(ev.detector_kind);
        out += ',';
        out += to_string(ev.signal);
        out += ',';
        out += std::to_string(ev.value);
        out += ',';
        out += format_fixed(ev.pre_mean, 6);
        out += ',';
        out += format_fixed(ev.post_mean, 6);
        out += ',';
        out += to_string(ev.direction);
        out += ',';
        out += ev.course;
        out += ',';
        out += format_fixed(ev.lat, 6);
        out += ',';
        out += format_fixed(ev.lon, 6);
        out += '\n';
    }
    return out;
}

std::vector<DetectionEvent> parse_detections_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open detections file: " + path);
    std::vector<DetectionEvent> events;
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == kDetectionsHeader) continue;
        }
        split_csv_line(line, f);
        if (f.size() != 16) throw InputError("bad detections row: " + line);
        DetectionEvent ev;
        auto parse_u64 = [&](std::string_view s, std::uint64_t& v) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw InputError("bad number in detections row: " + line);
        };
        auto parse_i64 = [&](std::string_view s, std::int64_t& v) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw InputError("bad number in detections row: " + line);
        };
        auto parse_f64 = [&](std::string_view s, double& v) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw InputError("bad number in detections row: " + line);
        };
        parse_u64(f[0], ev.seq);
        const auto t = parse_rfc3339(f[1]);
        if (!t) throw InputError("bad event_time in detections row: " + line);
        ev.event_time = *t;
        ev.key.curr = std::string(f[5]);
        ev.key.prev = std::string(f[6]);
        // f[4] carries the encoded key; the hour component survives there.
        const std::string encoded(f[4]);
        const auto second_sep = encoded.find('|', encoded.find('|') + 1);
        if (second_sep != std::string::npos) {
            int hour = -1;
            const char* hp = encoded.data() + second_sep + 1;
            auto [p, ec] = std::from_chars(hp, encoded.data() + encoded.size(), hour);
            if (ec != std::errc{} || hour < 0 || hour > 23)
                throw InputError("bad key hour in detections row: " + line);
            (void)p;
            ev.key.hour = hour;
        }
        ev.detector_kind = parse_detector_kind(f[7]);
        if (f[8] == "delay") {
            ev.signal = SignalKind::Delay;
        } else if (f[8] == "delta") {
            ev.signal = SignalKind::DeltaDelay;
        } else {
            throw InputError("unknown signal in detections row: " + line);
        }
        parse_i64(f[9], ev.value);
        parse_f64(f[10], ev.pre_mean);
        parse_f64(f[11], ev.post_mean);
        if (f[12] == "INCREASE") {
            ev.direction = ChangeDirection::Increase;
        } else if (f[12] == "REDUCTION") {
            ev.direction = ChangeDirection::Reduction;
        } else {
            throw InputError("unknown direction in detections row: " + line);
        }
        ev.course = std::string(f[13]);
        parse_f64(f[14], ev.lat);
        parse_f64(f[15], ev.lon);
        events.push_back(std::move(ev));
    }
    return events;
}

std::string render_run_stats_json(const RunConfig& config, const EngineStats& stats,
                                  const IngestStats& ingest) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(config.mode));
    j["signal"] = std::string(to_string(config.signal));
    j["detector"] = std::string(to_string(config.detector.kind));
    j["confidence"] = config.detector.confidence;
    j["timezone"] = config.tz.name();
    j["workers"] = config.workers;
    j["ingest"]["total"] = ingest.total;
    j["ingest"]["linked"] = ingest.linked;
    j["ingest"]["skipped_not_in_service"] = ingest.skipped_not_in_service;
    j["ingest"]["skipped_unusable"] = ingest.skipped_unusable;
    j["ingest"]["linked_ratio"] =
        ingest.total ? static_cast<double>(ingest.linked) / static_cast<double>(ingest.total) : 0.0;
    j["engine"]["processed"] = stats.processed;
    j["engine"]["skipped_unusable"] = stats.skipped_unusable;
    j["engine"]["skipped_late"] = stats.skipped_late;
    j["engine"]["skipped_not_in_service"] = stats.skipped_not_in_service;
    j["engine"]["detectors_created"] = stats.detectors_created;
    j["detections"]["total"] = stats.detections;
    j["detections"]["increases"] = stats.increases;
    j["detections"]["reductions"] = stats.reductions;
    j["per_day_processed"] = nlohmann::ordered_json::object();
    for (const auto& [day, n] : stats.per_day_processed) j["per_day_processed"][day] = n;
    return j.dump(2) + "\n";
}

RunArtifacts run_pipeline(const RunConfig& config) {
    config.validate();
    RunArtifacts artifacts;

    fs::create_directories(config.out_dir);
    auto out_path = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };

    try {
        std::vector<VehicleSnapshot> snapshots;
        if (config.spec_path) {
            ScenarioSpec spec = load_scenario_spec(*config.spec_path);
            if (config.seed_override) spec.rng_seed = *config.seed_override;
            Scenario scenario = generate(spec);
            snapshots = std::move(scenario.snapshots);
            artifacts.ingest.total = snapshots.size();
            artifacts.ingest.linked = snapshots.size();
        } else {
            Schedule schedule = Schedule::load_csv(*config.schedule_path);
            ReplayConfig replay_config;
            replay_config.tz = config.tz;
            auto [loaded, stats] = replay(*config.source_path, schedule, replay_config);
            snapshots = std::move(loaded);
            artifacts.ingest = stats;
        }

        EngineConfig engine_config;
        engine_config.mode = config.mode;
        engine_config.signal = config.signal;
        engine_config.detector = config.detector;
        engine_config.tz = config.tz;
        artifacts.result = run_engine(engine_config, snapshots, config.workers);

        std::vector<DetectionEvent> reported = artifacts.result.events;
        if (config.from_hour) {
            reported = slice_hours(reported, *config.from_hour, *config.to_hour, config.tz);
        }
        artifacts.summary = summarize(reported, artifacts.result.stats.per_day_processed,
                                      config.signal, config.tz);

        if (config.emit.count("detections")) {
            const auto path = out_path("detections.csv");
            write_text_file(path, render_detections_csv(artifacts.result.events, config.tz));
            artifacts.written_paths.push_back(path);
        }
        if (config.emit.count("summary")) {
            const auto csv_path = out_path("summary.csv");
            write_text_file(csv_path, render_summary_csv(artifacts.summary));
            artifacts.written_paths.push_back(csv_path);
            const auto json_path = out_path("summary.json");
            write_text_file(json_path, render_summary_json(artifacts.summary));
            artifacts.written_paths.push_back(json_path);
        }
        if (config.emit.count("geojson")) {
            GeoExport geo = to_geojson(reported, artifacts.result.stop_positions);
            const auto path = out_path("detections.geojson");
            write_text_file(path, geo.geojson);
            artifacts.written_paths.push_back(path);
            if (!geo.unplaced.empty()) {
                const auto unplaced_path = out_path("unplaced.csv");
                write_text_file(unplaced_path, render_detections_csv(geo.unplaced, config.tz));
                artifacts.written_paths.push_back(unplaced_path);
            }
        }
        const auto stats_path = out_path("run_stats.json");
        write_text_file(stats_path,
                        render_run_stats_json(config, artifacts.result.stats, artifacts.ingest));
        artifacts.written_paths.push_back(stats_path);
    } catch (...) {
        for (const auto& path : artifacts.written_paths) {
            std::error_code ec;
            fs::remove(path, ec);
        }
        throw;
    }
    return artifacts;
}

}  // namespace sdcd

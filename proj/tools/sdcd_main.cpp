#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdcd/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

struct CommonOptions {
    std::string source;
    std::string schedule;
    std::string spec;
    std::string mode = "edge";
    std::string signal = "delay";
    std::string detector = "adwin";
    double confidence = 0.002;
    std::size_t kswin_window = 100;
    std::size_t kswin_stat = 30;
    std::string timezone = "UTC";
    std::string out;
    int from_hour = -1;
    int to_hour = -1;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool matrix = false;
    std::vector<std::string> emit{"detections", "summary", "geojson"};
};

sdcd::KeyingMode parse_mode(const std::string& mode) {
    if (mode == "edge") return sdcd::KeyingMode::Edge;
    if (mode == "bin") return sdcd::KeyingMode::EdgeHour;
    throw sdcd::ConfigError("--mode must be edge or bin");
}

sdcd::SignalKind parse_signal(const std::string& signal) {
    if (signal == "delay") return sdcd::SignalKind::Delay;
    if (signal == "delta") return sdcd::SignalKind::DeltaDelay;
    throw sdcd::ConfigError("--signal must be delay or delta");
}

sdcd::DetectorKind parse_detector(const std::string& detector) {
    if (detector == "adwin") return sdcd::DetectorKind::Adwin;
    if (detector == "kswin") return sdcd::DetectorKind::Kswin;
    if (detector == "hddm") return sdcd::DetectorKind::HddmA;
    throw sdcd::ConfigError("--detector must be adwin, kswin or hddm");
}

sdcd::Timezone parse_timezone(const std::string& token) {
    const auto tz = sdcd::Timezone::parse(token);
    if (!tz) {
        throw sdcd::ConfigError("unsupported timezone '" + token +
                                "' (use UTC or a fixed offset like +02:00)");
    }
    return *tz;
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SDCD_OUT"); env != nullptr && *env != '\0') return env;
    return {};
}

sdcd::RunConfig build_run_config(const CommonOptions& opt) {
    sdcd::RunConfig config;
    if (!opt.source.empty()) config.source_path = opt.source;
    if (!opt.schedule.empty()) config.schedule_path = opt.schedule;
    if (!opt.spec.empty()) config.spec_path = opt.spec;
    if (opt.seed_set) config.seed_override = opt.seed;
    config.mode = parse_mode(opt.mode);
    config.signal = parse_signal(opt.signal);
    config.detector.kind = parse_detector(opt.detector);
    config.detector.confidence = opt.confidence;
    config.detector.kswin_window = opt.kswin_window;
    config.detector.kswin_stat = opt.kswin_stat;
    config.tz = parse_timezone(opt.timezone);
    config.workers = opt.workers == 0 ? 1 : opt.workers;
    if (opt.from_hour >= 0 || opt.to_hour >= 0) {
        if (opt.from_hour < 0 || opt.to_hour < 0) {
            throw sdcd::ConfigError("--from-hour and --to-hour must be given together");
        }
        config.from_hour = opt.from_hour;
        config.to_hour = opt.to_hour;
    }
    config.out_dir = resolve_out_dir(opt.out);
    config.emit = std::set<std::string>(opt.emit.begin(), opt.emit.end());
    return config;
}

void print_run_report(const sdcd::RunConfig& config, const sdcd::RunArtifacts& artifacts) {
    const auto& stats = artifacts.result.stats;
    const auto& ingest = artifacts.ingest;
    const double ratio =
        ingest.total ? 100.0 * static_cast<double>(ingest.linked) / static_cast<double>(ingest.total)
                     : 0.0;
    std::printf("run %s/%s/%s -> %s\n", std::string(to_string(config.detector.kind)).c_str(),
                std::string(to_string(config.signal)).c_str(),
                std::string(to_string(config.mode)).c_str(), config.out_dir.c_str());
    std::printf("  records: %llu processed (%llu read, %.1f%% linked)\n",
                static_cast<unsigned long long>(stats.processed),
                static_cast<unsigned long long>(ingest.total), ratio);
    std::printf("  skipped: %llu unusable, %llu late, %llu not in service\n",
                static_cast<unsigned long long>(stats.skipped_unusable),
                static_cast<unsigned long long>(stats.skipped_late),
                static_cast<unsigned long long>(stats.skipped_not_in_service));
    std::printf("  detectors created: %llu\n",
                static_cast<unsigned long long>(stats.detectors_created));
    std::printf("  detections: %llu (%llu increases, %llu reductions)\n",
                static_cast<unsigned long long>(stats.detections),
                static_cast<unsigned long long>(stats.increases),
                static_cast<unsigned long long>(stats.reductions));
}

int cmd_run(const CommonOptions& opt) {
    if (!opt.matrix) {
        const sdcd::RunConfig config = build_run_config(opt);
        const auto artifacts = sdcd::run_pipeline(config);
        print_run_report(config, artifacts);
        return kExitOk;
    }

    // --matrix: the six detector/signal combinations as independent runs.
    const std::string base_out = resolve_out_dir(opt.out);
    if (base_out.empty()) {
        throw sdcd::ConfigError("an output directory is required (--out or SDCD_OUT)");
    }
    std::vector<sdcd::RunConfig> configs;
    std::vector<std::string> names;
    for (const char* detector : {"adwin", "kswin", "hddm"}) {
        for (const char* signal : {"delay", "delta"}) {
            CommonOptions combo = opt;
            combo.detector = detector;
            combo.signal = signal;
            combo.workers = 1;
            combo.out = (fs::path(base_out) / (std::string(detector) + "_" + signal)).string();
            configs.push_back(build_run_config(combo));
            names.push_back(combo.out);
        }
    }
    std::vector<sdcd::RunArtifacts> results(configs.size());
    std::vector<std::string> errors(configs.size());
    const unsigned parallel = std::min<unsigned>(opt.workers == 0 ? 1 : opt.workers,
                                                 static_cast<unsigned>(configs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            try {
                results[i] = sdcd::run_pipeline(configs[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < parallel; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    bool failed = false;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!errors[i].empty()) {
            std::fprintf(stderr, "error in %s: %s\n", names[i].c_str(), errors[i].c_str());
            failed = true;
            continue;
        }
        print_run_report(configs[i], results[i]);
    }
    if (failed) throw sdcd::InputError("one or more matrix runs failed");
    return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_flag, bool seed_set,
              std::uint64_t seed) {
    const std::string out_dir = resolve_out_dir(out_flag);
    if (out_dir.empty()) {
        throw sdcd::ConfigError("an output directory is required (--out or SDCD_OUT)");
    }
    sdcd::ScenarioSpec spec = sdcd::load_scenario_spec(spec_path);
    if (seed_set) spec.rng_seed = seed;
    const sdcd::Scenario scenario = sdcd::generate(spec);
    const auto files = sdcd::write_scenario(scenario, out_dir);
    std::printf("synth: %zu snapshots, %zu schedule rows, %zu stops\n", scenario.snapshots.size(),
                scenario.schedule.size(), scenario.stop_positions.size());
    std::printf("  %s\n  %s\n  %s\n", files.snapshots_path.c_str(), files.schedule_path.c_str(),
                files.ground_truth_path.c_str());
    return kExitOk;
}

int cmd_summarize(const std::string& detections_path, const std::string& stats_path,
                  const std::string& tz_flag, int from_hour, int to_hour,
                  const std::string& out_path) {
    auto events = sdcd::parse_detections_csv(detections_path);

    // Per-day record counts and the run timezone come from the run manifest
    // when available.
    std::map<std::string, std::uint64_t> per_day;
    sdcd::Timezone tz = parse_timezone(tz_flag);
    sdcd::SignalKind signal =
        events.empty() ? sdcd::SignalKind::Delay : events.front().signal;
    std::string manifest = stats_path;
    if (manifest.empty()) {
        const auto sibling = fs::path(detections_path).parent_path() / "run_stats.json";
        if (fs::exists(sibling)) manifest = sibling.string();
    }
    if (!manifest.empty()) {
        std::ifstream in(manifest);
        if (!in) throw sdcd::InputError("cannot open stats file: " + manifest);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw sdcd::InputError("bad stats file " + manifest + ": " + e.what());
        }
        if (j.contains("per_day_processed")) {
            for (const auto& [day, n] : j["per_day_processed"].items()) {
                per_day[day] = n.get<std::uint64_t>();
            }
        }
        if (j.contains("timezone") && tz_flag == "UTC") {
            tz = parse_timezone(j["timezone"].get<std::string>());
        }
        if (j.contains("signal") && events.empty()) {
            signal = j["signal"].get<std::string>() == "delta" ? sdcd::SignalKind::DeltaDelay
                                                               : sdcd::SignalKind::Delay;
        }
    }

    if (from_hour >= 0 || to_hour >= 0) {
        if (from_hour < 0 || to_hour < 0) {
            throw sdcd::ConfigError("--from-hour and --to-hour must be given together");
        }
        events = sdcd::slice_hours(events, from_hour, to_hour, tz);
    }
    const auto rows = sdcd::summarize(events, per_day, signal, tz);
    const std::string csv = sdcd::render_summary_csv(rows);
    if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw sdcd::InputError("cannot write summary: " + out_path);
        out << csv;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming delay change detection over public transport location streams"};
    app.require_subcommand(1);

    CommonOptions opt;
    auto* run = app.add_subcommand("run", "Replay or synthesize a stream and detect delay changes");
    run->add_option("--source", opt.source, "Snapshot CSV to replay");
    run->add_option("--schedule", opt.schedule, "Static schedule CSV for the replay join");
    run->add_option("--spec", opt.spec, "Scenario spec JSON for a synthetic stream");
    run->add_option("--mode", opt.mode, "Keying: edge (per edge) or bin (per edge and hour)")
        ->check(CLI::IsMember({"edge", "bin"}));
    run->add_option("--signal", opt.signal, "Signal: delay or delta")
        ->check(CLI::IsMember({"delay", "delta"}));
    run->add_option("--detector", opt.detector, "Change detector")
        ->check(CLI::IsMember({"adwin", "kswin", "hddm"}));
    run->add_option("--confidence", opt.confidence, "Detector confidence (delta / alpha)");
    run->add_option("--kswin-window", opt.kswin_window, "KSWIN sliding window size");
    run->add_option("--kswin-stat", opt.kswin_stat, "KSWIN recent statistic block size");
    run->add_option("--timezone", opt.timezone, "Timezone for hours and dates (UTC or offset)");
    run->add_option("--out", opt.out, "Output directory (falls back to SDCD_OUT)");
    run->add_option("--from-hour", opt.from_hour, "Restrict summary/geojson to hours >= this");
    run->add_option("--to-hour", opt.to_hour, "Restrict summary/geojson to hours < this");
    run->add_option("--workers", opt.workers, "Worker threads");
    run->add_option("--seed", opt.seed, "Override the scenario rng seed")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    run->add_flag("--matrix", opt.matrix,
                  "Run all six detector/signal combinations into subdirectories");
    run->add_option("--emit", opt.emit, "Artifacts to write: detections, summary, geojson")
        ->delimiter(',');

    std::string synth_spec, synth_out;
    std::uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario to files");
    synth->add_option("--spec", synth_spec, "Scenario spec JSON")->required();
    synth->add_option("--out", synth_out, "Output directory (falls back to SDCD_OUT)");
    synth->add_option("--seed", synth_seed, "Override the scenario rng seed")
        ->each([&synth_seed_set](const std::string&) { synth_seed_set = true; });

    std::string sum_detections, sum_stats, sum_tz = "UTC", sum_out;
    int sum_from = -1, sum_to = -1;
    auto* summarize = app.add_subcommand("summarize", "Re-derive the per-day summary table");
    summarize->add_option("--detections", sum_detections, "Detections CSV from a run")->required();
    summarize->add_option("--stats", sum_stats, "run_stats.json for per-day record counts");
    summarize->add_option("--timezone", sum_tz, "Timezone override");
    summarize->add_option("--from-hour", sum_from, "Keep hours >= this");
    summarize->add_option("--to-hour", sum_to, "Keep hours < this");
    summarize->add_option("--out", sum_out, "Write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(opt);
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out, synth_seed_set, synth_seed);
        if (summarize->parsed())
            return cmd_summarize(sum_detections, sum_stats, sum_tz, sum_from, sum_to, sum_out);
    } catch (const sdcd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const sdcd::InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}

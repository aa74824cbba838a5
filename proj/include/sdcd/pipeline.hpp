#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdcd/engine.hpp"
#include "sdcd/ingest.hpp"
#include "sdcd/report.hpp"
#include "sdcd/scenario.hpp"

namespace sdcd {

// A full run: one source, one (mode, signal, detector) combination, one
// output directory.
struct RunConfig {
    std::optional<std::string> source_path;    // snapshot file (with schedule_path)
    std::optional<std::string> schedule_path;
    std::optional<std::string> spec_path;      // synthetic scenario
    std::optional<std::uint64_t> seed_override;

    KeyingMode mode = KeyingMode::Edge;
    SignalKind signal = SignalKind::Delay;
    DetectorConfig detector;
    Timezone tz = Timezone::utc();
    unsigned workers = 1;
    std::optional<int> from_hour;              // optional slice on summary/geojson
    std::optional<int> to_hour;

    std::string out_dir;
    std::set<std::string> emit{"detections", "summary", "geojson"};

    void validate() const;  // throws ConfigError
};

struct RunArtifacts {
    RunResult result;
    std::vector<DailySummary> summary;
    IngestStats ingest;
    std::vector<std::string> written_paths;
};

// Runs the configured pipeline and writes the requested artifacts under
// out_dir: detections.csv, summary.csv, summary.json, detections.geojson
// (plus unplaced.csv when needed) and run_stats.json. Partially written
// outputs are removed when the run fails.
RunArtifacts run_pipeline(const RunConfig& config);

// Detection file round trip used by the summarize command.
std::string render_detections_csv(const std::vector<DetectionEvent>& events, const Timezone& tz);
std::vector<DetectionEvent> parse_detections_csv(const std::string& path);

std::string render_run_stats_json(const RunConfig& config, const EngineStats& stats,
                                  const IngestStats& ingest);

}  // namespace sdcd

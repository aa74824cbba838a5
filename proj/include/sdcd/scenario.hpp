#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdcd/ingest.hpp"
#include "sdcd/model.hpp"
#include "sdcd/time.hpp"

namespace sdcd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PerturbationKind { Step, Hourly };

// Extra running time injected on one edge. STEP is active for every traversal
// inside [start, end). HOURLY additionally requires the hour of day to fall in
// [hour_of(start), hour_of(end)), i.e. the same slot every day of the interval.
struct Perturbation {
    Edge edge;
    PerturbationKind kind = PerturbationKind::Step;
    unix_time_t start = 0;
    unix_time_t end = 0;
    std::int64_t added_delay_s = 0;

    bool active_at(unix_time_t t, const Timezone& tz) const;
};

// Synthetic transit scenario: seeded stop layout, loop lines, vehicles
// dispatched on a fixed headway, Gaussian noise on running times that
// accumulates along the loop. Stands in for a live AVL feed and provides
// exact ground truth.
struct ScenarioSpec {
    std::uint64_t rng_seed = 1;
    std::uint64_t layout_seed = 1;
    unsigned stop_count = 50;
    unsigned line_count = 8;
    unsigned stops_per_line = 12;
    // When non-empty, overrides the seeded line construction. Each sequence
    // is a loop: the last stop must equal the first.
    std::vector<std::vector<StopId>> explicit_lines;
    std::int64_t headway_s = 600;
    unsigned days = 4;
    double noise_std_s = 20.0;
    std::int64_t start_day = 18963;  // days since epoch; 2021-12-03 default
    int service_start_hour = 5;
    int service_end_hour = 23;
    Timezone tz = Timezone::utc();
    double center_lat = 52.0;
    double center_lon = 20.0;
    double span_deg = 0.25;
    std::int64_t base_run_min_s = 60;
    std::int64_t base_run_max_s = 180;
    std::vector<Perturbation> perturbations;

    void validate() const;  // throws ConfigError
};

struct GroundTruth {
    std::vector<Perturbation> perturbations;
    double noise_std_s = 0.0;
    // Observation count per edge, keyed like DetectorKey ("curr|prev").
    std::map<std::string, std::uint64_t> edge_observations;
};

struct Scenario {
    std::vector<VehicleSnapshot> snapshots;  // ordered by event time
    std::vector<ScheduleEntry> schedule;
    std::map<StopId, std::pair<double, double>> stop_positions;  // lat, lon
    TransportGraph graph;  // edges that produce observations
    GroundTruth truth;
};

Scenario generate(const ScenarioSpec& spec);

// JSON round trip for spec files (see README for the schema).
ScenarioSpec load_scenario_spec(const std::string& path);
ScenarioSpec parse_scenario_spec(const std::string& json_text);

// Writes snapshots.csv, schedule.csv and ground_truth.json under out_dir.
struct ScenarioFiles {
    std::string snapshots_path;
    std::string schedule_path;
    std::string ground_truth_path;
};
ScenarioFiles write_scenario(const Scenario& scenario, const std::string& out_dir);

}  // namespace sdcd

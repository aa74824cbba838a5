#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "sdcd/time.hpp"

namespace sdcd {

// Stops are opaque tokens; equality is exact token equality.
using StopId = std::string;

// Directed pair of consecutively visited stops. (a,b) and (b,a) are distinct.
struct Edge {
    StopId prev;
    StopId curr;

    auto operator<=>(const Edge&) const = default;
};

// The observed public-transport network: every edge endpoint is a known stop.
struct TransportGraph {
    std::set<StopId> stops;
    std::set<Edge> edges;
};

// One vehicle location record: current position plus real and scheduled
// departure times at the two most recently visited stops. Timestamps that the
// source could not provide are absent; the delay operations below report such
// records as unusable instead of guessing.
struct VehicleSnapshot {
    unix_time_t event_time = 0;
    std::string vehicle;
    std::string line;
    std::string course;  // one run of a vehicle over its line's loop
    double lat = 0.0;
    double lon = 0.0;
    StopId curr_stop;  // most recently departed stop
    StopId prev_stop;
    std::optional<unix_time_t> real_dep_curr;
    std::optional<unix_time_t> sched_dep_curr;
    std::optional<unix_time_t> real_dep_prev;
    std::optional<unix_time_t> sched_dep_prev;
    bool in_service = true;

    bool operator==(const VehicleSnapshot&) const = default;
};

// Derived per-edge signal sample.
struct DelayObservation {
    Edge edge;
    unix_time_t event_time = 0;
    std::string course;
    std::int64_t d = 0;                      // seconds; positive = late
    std::optional<std::int64_t> delta_d;     // d at curr minus d at prev
    int hour = 0;                            // hour-of-day in the run timezone
};

// Delay at the most recently departed stop: real minus scheduled departure,
// whole seconds. Negative means the vehicle left early. Records without both
// timestamps at the current stop are unusable.
std::optional<std::int64_t> delay(const VehicleSnapshot& s);

// Delay change along the edge: delay at curr minus delay at prev for the same
// course. Positive means delay grew while travelling the edge. Needs all four
// departure timestamps and a course token to pair the two stops.
std::optional<std::int64_t> delta_delay(const VehicleSnapshot& s);

// Basic structural validity: distinct stops, monotone timestamps where
// present, event time not before the departure it reports.
bool is_structurally_valid(const VehicleSnapshot& s);

// Adds the snapshot's stops and directed edge to the graph. Idempotent.
// Returns false (graph unchanged) when prev_stop equals curr_stop.
bool extend_graph(TransportGraph& graph, const VehicleSnapshot& s);

// Builds the per-edge signal sample, or nothing when the record is unusable
// for the delay signal.
std::optional<DelayObservation> make_observation(const VehicleSnapshot& s, const Timezone& tz);

}  // namespace sdcd

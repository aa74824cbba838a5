#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdcd/engine.hpp"

namespace sdcd {

// One row of the per-day detection summary. Median and standard deviation
// are computed over the absolute triggering values of that day's detections
// and are absent when the day had none.
struct DailySummary {
    std::string date;
    SignalKind signal = SignalKind::Delay;
    std::uint64_t records = 0;
    std::uint64_t increases = 0;
    std::uint64_t reductions = 0;
    std::optional<double> median_abs_s;
    std::optional<double> std_abs_s;
};

// One row per calendar day present in either the events or the per-day
// record counts. Median uses the lower-median convention for even counts;
// the standard deviation is the population formula.
std::vector<DailySummary> summarize(const std::vector<DetectionEvent>& events,
                                    const std::map<std::string, std::uint64_t>& per_day_records,
                                    SignalKind signal, const Timezone& tz);

// Keeps events whose local hour of day falls in [from_hour, to_hour).
// Throws ConfigError unless 0 <= from_hour < to_hour <= 24.
std::vector<DetectionEvent> slice_hours(const std::vector<DetectionEvent>& events, int from_hour,
                                        int to_hour, const Timezone& tz);

// Table with columns: signal,date,records,increases,reductions,median_s,std_s
std::string render_summary_csv(const std::vector<DailySummary>& rows);
std::string render_summary_json(const std::vector<DailySummary>& rows);

struct GeoExport {
    std::string geojson;                   // RFC 7946 FeatureCollection
    std::vector<DetectionEvent> unplaced;  // events without a known position
};

// One Point feature per event at its destination stop, [lon, lat] order.
// Events whose stop has no known position go to `unplaced` instead of being
// dropped silently.
GeoExport to_geojson(const std::vector<DetectionEvent>& events,
                     const std::map<StopId, StopPosition>& positions);

}  // namespace sdcd

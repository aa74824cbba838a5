#include "sdcd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sdcd/scenario.hpp"  // ConfigError

namespace sdcd {

namespace {

std::string format_stat(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

std::vector<DailySummary> summarize(const std::vector<DetectionEvent>& events,
                                    const std::map<std::string, std::uint64_t>& per_day_records,
                                    SignalKind signal, const Timezone& tz) {
    std::map<std::string, std::vector<const DetectionEvent*>> by_day;
    for (const auto& ev : events) by_day[tz.local_date(ev.event_time)].push_back(&ev);

    std::map<std::string, DailySummary> rows;
    for (const auto& [day, n] : per_day_records) {
        DailySummary row;
        row.date = day;
        row.signal = signal;
        row.records = n;
        rows.emplace(day, std::move(row));
    }
    for (const auto& [day, day_events] : by_day) {
        auto& row = rows[day];
        row.date = day;
        row.signal = signal;
        std::vector<double> abs_values;
        abs_values.reserve(day_events.size());
        for (const auto* ev : day_events) {
            if (ev->direction == ChangeDirection::Increase) {
                ++row.increases;
            } else {
                ++row.reductions;
            }
            abs_values.push_back(std::abs(static_cast<double>(ev->value)));
        }
        std::sort(abs_values.begin(), abs_values.end());
        row.median_abs_s = abs_values[(abs_values.size() - 1) / 2];  // lower median
        double mean = 0.0;
        for (double v : abs_values) mean += v;
        mean /= static_cast<double>(abs_values.size());
        double ss = 0.0;
        for (double v : abs_values) ss += (v - mean) * (v - mean);
        row.std_abs_s = std::sqrt(ss / static_cast<double>(abs_values.size()));
    }

    std::vector<DailySummary> out;
    out.reserve(rows.size());
    for (auto& [day, row] : rows) out.push_back(std::move(row));
    return out;
}

std::vector<DetectionEvent> slice_hours(const std::vector<DetectionEvent>& events, int from_hour,
                                        int to_hour, const Timezone& tz) {
    if (from_hour < 0 || to_hour > 24 || from_hour >= to_hour) {
        throw ConfigError("hour slice must satisfy 0 <= from < to <= 24");
    }
    std::vector<DetectionEvent> out;
    for (const auto& ev : events) {
        const int h = tz.hour_of_day(ev.event_time);
        if (h >= from_hour && h < to_hour) out.push_back(ev);
    }
    return out;
}

std::string render_summary_csv(const std::vector<DailySummary>& rows) {
    std::string out = "signal,date,records,increases,reductions,median_s,std_s\n";
    for (const auto& row : rows) {
        out += to_string(row.signal);
        out += ',';
        out += row.date;
        out += ',';
        out += std::to_string(row.records);
        out += ',';
        out += std::to_string(row.increases);
        out += ',';
        out += std::to_string(row.reductions);
        out += ',';
        if (row.median_abs_s) out += format_stat(*row.median_abs_s);
        out += ',';
        if (row.std_abs_s) out += format_stat(*row.std_abs_s);
        out += '\n';
    }
    return out;
}

std::string render_summary_json(const std::vector<DailySummary>& rows) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["signal"] = std::string(to_string(row.signal));
        r["date"] = row.date;
        r["records"] = row.records;
        r["increases"] = row.increases;
        r["reductions"] = row.reductions;
        r["median_s"] = row.median_abs_s ? nlohmann::ordered_json(*row.median_abs_s)
                                         : nlohmann::ordered_json(nullptr);
        r["std_s"] = row.std_abs_s ? nlohmann::ordered_json(*row.std_abs_s)
                                   : nlohmann::ordered_json(nullptr);
        doc.push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

GeoExport to_geojson(const std::vector<DetectionEvent>& events,
                     const std::map<StopId, StopPosition>& positions) {
    GeoExport out;
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = nlohmann::ordered_json::array();
    for (const auto& ev : events) {
        const auto it = positions.find(ev.key.curr);
        if (it == positions.end()) {
            out.unplaced.push_back(ev);
            continue;
        }
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["geometry"]["type"] = "Point";
        feature["geometry"]["coordinates"] = {it->second.lon, it->second.lat};
        feature["properties"]["direction"] = std::string(to_string(ev.direction));
        feature["properties"]["signal"] = std::string(to_string(ev.signal));
        feature["properties"]["detector"] = std::string(to_string(ev.detector_kind));
        feature["properties"]["time"] = format_rfc3339_utc(ev.event_time);
        doc["features"].push_back(std::move(feature));
    }
    out.geojson = doc.dump(2) + "\n";
    return out;
}

}  // namespace sdcd

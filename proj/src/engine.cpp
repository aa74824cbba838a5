#include "sdcd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace sdcd {

std::string_view to_string(KeyingMode mode) {
    return mode == KeyingMode::Edge ? "edge" : "bin";
}

std::string_view to_string(SignalKind signal) {
    return signal == SignalKind::Delay ? "delay" : "delta";
}

std::string_view to_string(ChangeDirection d) {
    return d == ChangeDirection::Increase ? "INCREASE" : "REDUCTION";
}

std::string DetectorKey::encode() const {
    std::string out = curr;
    out += '|';
    out += prev;
    if (hour) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "|%02d", *hour);
        out += buf;
    }
    return out;
}

DetectorKey detector_id(const VehicleSnapshot& s, KeyingMode mode, const Timezone& tz) {
    DetectorKey key;
    key.curr = s.curr_stop;
    key.prev = s.prev_stop;
    if (mode == KeyingMode::EdgeHour) key.hour = tz.hour_of_day(s.event_time);
    return key;
}

void EngineStats::merge(const EngineStats& other) {
    processed += other.processed;
    skipped_unusable += other.skipped_unusable;
    skipped_late += other.skipped_late;
    skipped_not_in_service += other.skipped_not_in_service;
    detectors_created += other.detectors_created;
    detections += other.detections;
    increases += other.increases;
    reductions += other.reductions;
    for (const auto& [day, n] : other.per_day_processed) per_day_processed[day] += n;
    for (const auto& [key, n] : other.per_key_observations) per_key_observations[key] += n;
}

Engine::Engine(EngineConfig config, DetectorFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)) {
    config_.detector.validate();
}

std::optional<DetectionEvent> Engine::process(const VehicleSnapshot& s) {
    return process_with_seq(s, seq_++);
}

std::optional<DetectionEvent> Engine::process_with_seq(const VehicleSnapshot& s,
                                                       std::uint64_t seq) {
    if (!s.in_service) {
        ++stats_.skipped_not_in_service;
        return std::nullopt;
    }
    if (!is_structurally_valid(s)) {
        ++stats_.skipped_unusable;
        return std::nullopt;
    }
    const auto obs = make_observation(s, config_.tz);
    if (!obs) {
        ++stats_.skipped_unusable;
        return std::nullopt;
    }
    std::int64_t value;
    if (config_.signal == SignalKind::DeltaDelay) {
        if (!obs->delta_d) {
            ++stats_.skipped_unusable;
            return std::nullopt;
        }
        value = *obs->delta_d;
    } else {
        value = obs->d;
    }

    const DetectorKey key = detector_id(s, config_.mode, config_.tz);
    auto it = registry_.find(key);
    if (it == registry_.end()) {
        auto det = factory_ ? factory_(config_.detector) : make_detector(config_.detector);
        it = registry_.emplace(key, std::move(det)).first;
        ++stats_.detectors_created;
    }

    ++stats_.processed;
    stats_.per_day_processed[config_.tz.local_date(s.event_time)] += 1;
    stats_.per_key_observations[key.encode()] += 1;

    auto pos = positions_.find(s.curr_stop);
    if (pos == positions_.end()) {
        positions_.emplace(s.curr_stop, StopPosition{s.lat, s.lon, seq});
    } else if (seq < pos->second.first_seq) {
        pos->second = StopPosition{s.lat, s.lon, seq};
    }

    ChangeDetector& det = *it->second;
    if (!det.add_value(static_cast<double>(value))) return std::nullopt;

    const MeanPair means = det.pre_post_means();
    DetectionEvent ev;
    ev.seq = seq;
    ev.key = key;
    ev.detector_kind = det.kind();
    ev.signal = config_.signal;
    ev.event_time = s.event_time;
    ev.value = value;
    ev.pre_mean = means.pre;
    ev.post_mean = means.post;
    ev.direction =
        means.post > means.pre ? ChangeDirection::Increase : ChangeDirection::Reduction;
    ev.course = s.course;
    const auto& p = positions_.at(s.curr_stop);
    ev.lat = p.lat;
    ev.lon = p.lon;
    ++stats_.detections;
    if (ev.direction == ChangeDirection::Increase) {
        ++stats_.increases;
    } else {
        ++stats_.reductions;
    }
    return ev;
}

namespace {

// FNV-1a over the encoded key; stable across platforms so shard assignment
// is deterministic.
std::uint64_t key_hash(const DetectorKey& key) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : key.encode()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

struct LateFilter {
    std::int64_t tolerance;
    unix_time_t max_seen = std::numeric_limits<unix_time_t>::min();

    bool is_late(unix_time_t t) {
        if (max_seen != std::numeric_limits<unix_time_t>::min() && t < max_seen - tolerance)
            return true;
        max_seen = std::max(max_seen, t);
        return false;
    }
};

void finalize(RunResult& result) {
    std::sort(result.events.begin(), result.events.end(),
              [](const DetectionEvent& a, const DetectionEvent& b) { return a.seq < b.seq; });
    // Pin every event to the globally first-seen position of its destination
    // stop; shard-local first sightings depend on the worker count.
    for (auto& ev : result.events) {
        if (auto it = result.stop_positions.find(ev.key.curr); it != result.stop_positions.end()) {
            ev.lat = it->second.lat;
            ev.lon = it->second.lon;
        }
    }
}

}  // namespace

RunResult run_engine(const EngineConfig& config, const std::vector<VehicleSnapshot>& snapshots,
                     unsigned workers) {
    if (workers == 0) workers = 1;
    RunResult result;

    // The late policy needs the global arrival order, so it runs before
    // sharding.
    LateFilter late{config.late_tolerance_s};
    std::vector<std::uint32_t> shard_of(snapshots.size());
    std::vector<bool> accepted(snapshots.size());
    std::uint64_t n_late = 0;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        if (late.is_late(snapshots[i].event_time)) {
            ++n_late;
            accepted[i] = false;
            continue;
        }
        accepted[i] = true;
        shard_of[i] = static_cast<std::uint32_t>(
            key_hash(detector_id(snapshots[i], config.mode, config.tz)) % workers);
    }

    std::vector<Engine> engines;
    engines.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) engines.emplace_back(config);
    std::vector<std::vector<DetectionEvent>> shard_events(workers);

    auto work = [&](unsigned w) {
        for (std::size_t i = 0; i < snapshots.size(); ++i) {
            if (!accepted[i] || shard_of[i] != w) continue;
            if (auto ev = engines[w].process_with_seq(snapshots[i], i)) {
                shard_events[w].push_back(std::move(*ev));
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }

    for (unsigned w = 0; w < workers; ++w) {
        result.stats.merge(engines[w].stats());
        for (auto& ev : shard_events[w]) result.events.push_back(std::move(ev));
        for (const auto& [stop, pos] : engines[w].stop_positions()) {
            auto it = result.stop_positions.find(stop);
            if (it == result.stop_positions.end() || pos.first_seq < it->second.first_seq) {
                result.stop_positions[stop] = pos;
            }
        }
    }
    result.stats.skipped_late = n_late;
    finalize(result);
    return result;
}

RunResult run_engine_stream(const EngineConfig& config,
                            const std::function<std::optional<VehicleSnapshot>()>& source) {
    RunResult result;
    Engine engine(config);
    LateFilter late{config.late_tolerance_s};
    std::uint64_t seq = 0;
    std::uint64_t n_late = 0;
    while (auto s = source()) {
        const std::uint64_t i = seq++;
        if (late.is_late(s->event_time)) {
            ++n_late;
            continue;
        }
        if (auto ev = engine.process_with_seq(*s, i)) {
            result.events.push_back(std::move(*ev));
        }
    }
    result.stats = engine.stats();
    result.stats.skipped_late = n_late;
    result.stop_positions = engine.stop_positions();
    finalize(result);
    return result;
}

std::map<std::string, std::uint64_t> shuffle_preview(const std::vector<VehicleSnapshot>& snapshots,
                                                     KeyingMode mode, const Timezone& tz) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& s : snapshots) {
        if (!s.in_service || !is_structurally_valid(s)) continue;
        if (!make_observation(s, tz)) continue;
        counts[detector_id(s, mode, tz).encode()] += 1;
    }
    return counts;
}

}  // namespace sdcd

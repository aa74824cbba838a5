#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdcd/detectors/change_detector.hpp"
#include "sdcd/model.hpp"
#include "sdcd/time.hpp"

namespace sdcd {

// EDGE keys one detector per directed edge; EDGE_HOUR (bin-based) extends the
// key with the hour of day, at most 24 detectors per edge.
enum class KeyingMode { Edge, EdgeHour };

enum class SignalKind { Delay, DeltaDelay };

std::string_view to_string(KeyingMode mode);
std::string_view to_string(SignalKind signal);

struct DetectorKey {
    StopId curr;
    StopId prev;
    std::optional<int> hour;  // present iff mode is EdgeHour

    auto operator<=>(const DetectorKey&) const = default;

    // "curr|prev" or "curr|prev|HH" with a zero-padded hour. The separator
    // keeps composite stop tokens from colliding.
    std::string encode() const;
};

DetectorKey detector_id(const VehicleSnapshot& s, KeyingMode mode, const Timezone& tz);

enum class ChangeDirection { Increase, Reduction };

std::string_view to_string(ChangeDirection d);

struct DetectionEvent {
    std::uint64_t seq = 0;  // global index of the triggering record
    DetectorKey key;
    DetectorKind detector_kind = DetectorKind::Adwin;
    SignalKind signal = SignalKind::Delay;
    unix_time_t event_time = 0;
    std::int64_t value = 0;  // the observation that completed the change
    double pre_mean = 0.0;
    double post_mean = 0.0;
    ChangeDirection direction = ChangeDirection::Increase;
    std::string course;
    double lat = 0.0;  // destination stop position
    double lon = 0.0;
};

struct EngineConfig {
    KeyingMode mode = KeyingMode::Edge;
    SignalKind signal = SignalKind::Delay;
    DetectorConfig detector;
    Timezone tz = Timezone::utc();
    // Records older than the newest seen event time by more than this are
    // dropped as late (applied by the run_engine drivers).
    std::int64_t late_tolerance_s = 120;
};

struct EngineStats {
    std::uint64_t processed = 0;
    std::uint64_t skipped_unusable = 0;
    std::uint64_t skipped_late = 0;
    std::uint64_t skipped_not_in_service = 0;
    std::uint64_t detectors_created = 0;
    std::uint64_t detections = 0;
    std::uint64_t increases = 0;
    std::uint64_t reductions = 0;
    std::map<std::string, std::uint64_t> per_day_processed;      // local date
    std::map<std::string, std::uint64_t> per_key_observations;   // encoded key

    void merge(const EngineStats& other);
};

struct StopPosition {
    double lat = 0.0;
    double lon = 0.0;
    std::uint64_t first_seq = 0;
};

// Routes each snapshot to its keyed detector (created lazily on first
// sight) and reports detections. Detectors are key-local; processing is
// sequential per key. The late-record policy lives in the run_engine
// drivers, which see the whole stream.
class Engine {
public:
    using DetectorFactory = std::function<std::unique_ptr<ChangeDetector>(const DetectorConfig&)>;

    explicit Engine(EngineConfig config, DetectorFactory factory = nullptr);

    // Feeds one snapshot. Unusable records (missing timestamps for the
    // configured signal, structural problems) are counted and change no
    // detector state.
    std::optional<DetectionEvent> process(const VehicleSnapshot& s);
    // Same, with a caller-assigned record index (used by the sharded driver
    // so event sequence numbers stay global).
    std::optional<DetectionEvent> process_with_seq(const VehicleSnapshot& s, std::uint64_t seq);

    const EngineStats& stats() const { return stats_; }
    // First observed position per destination stop.
    const std::map<StopId, StopPosition>& stop_positions() const { return positions_; }

private:
    EngineConfig config_;
    DetectorFactory factory_;
    std::map<DetectorKey, std::unique_ptr<ChangeDetector>> registry_;
    std::map<StopId, StopPosition> positions_;
    EngineStats stats_;
    std::uint64_t seq_ = 0;
};

struct RunResult {
    std::vector<DetectionEvent> events;  // ordered by triggering record
    EngineStats stats;
    std::map<StopId, StopPosition> stop_positions;
};

// Drives a full stream through keyed detectors. Applies the late-record
// policy, then shards records by key hash across `workers` threads; results
// are identical for any worker count.
RunResult run_engine(const EngineConfig& config, const std::vector<VehicleSnapshot>& snapshots,
                     unsigned workers = 1);

// Single-pass streaming variant: pulls snapshots until `source` returns
// nullopt. Equivalent to run_engine with one worker, without materializing
// the stream.
RunResult run_engine_stream(const EngineConfig& config,
                            const std::function<std::optional<VehicleSnapshot>()>& source);

// Observation count per encoded key without running any detector.
std::map<std::string, std::uint64_t> shuffle_preview(const std::vector<VehicleSnapshot>& snapshots,
                                                     KeyingMode mode, const Timezone& tz);

}  // namespace sdcd

#include <doctest.h>

#include <deque>
#include <memory>

#include "oracles.hpp"
#include "sdcd/engine.hpp"

using namespace sdcd;

namespace {

// d is the delay at the current stop, d_prev at the previous one; the engine
// recovers both from the four timestamps.
VehicleSnapshot make_snap(const StopId& prev, const StopId& curr, unix_time_t t, std::int64_t d,
                          std::int64_t d_prev = 0, const std::string& course = "c-1") {
    VehicleSnapshot s;
    s.event_time = t;
    s.vehicle = "v-1";
    s.line = "L";
    s.course = course;
    s.lat = 52.0;
    s.lon = 21.0;
    s.curr_stop = curr;
    s.prev_stop = prev;
    s.real_dep_curr = t;
    s.sched_dep_curr = t - d;
    s.real_dep_prev = t - 300;
    s.sched_dep_prev = t - 300 - d_prev;
    return s;
}

EngineConfig adwin_config(KeyingMode mode, SignalKind signal) {
    EngineConfig c;
    c.mode = mode;
    c.signal = signal;
    c.detector.kind = DetectorKind::Adwin;
    return c;
}

class RecordingDetector final : public ChangeDetector {
public:
    RecordingDetector(std::unique_ptr<ChangeDetector> inner, std::vector<double>* sink)
        : inner_(std::move(inner)), sink_(sink) {}

    bool add_value(double value) override {
        sink_->push_back(value);
        return inner_->add_value(value);
    }
    MeanPair pre_post_means() const override { return inner_->pre_post_means(); }
    std::uint64_t observed_count() const override { return inner_->observed_count(); }
    DetectorKind kind() const override { return inner_->kind(); }
    std::uint64_t state_digest() const override { return inner_->state_digest(); }

private:
    std::unique_ptr<ChangeDetector> inner_;
    std::vector<double>* sink_;
};

}  // namespace

TEST_CASE("detector keys join stops with a separator, hour only in bin mode") {
    const auto tz = Timezone::utc();
    auto s = make_snap("2001", "2002", *parse_rfc3339("2021-12-18T08:15:00Z"), 10);
    CHECK(detector_id(s, KeyingMode::Edge, tz).encode() == "2002|2001");
    CHECK(detector_id(s, KeyingMode::EdgeHour, tz).encode() == "2002|2001|08");

    auto before = make_snap("2001", "2002", *parse_rfc3339("2021-12-18T08:59:59Z"), 10);
    auto after = make_snap("2001", "2002", *parse_rfc3339("2021-12-18T09:00:00Z"), 10);
    CHECK(detector_id(before, KeyingMode::EdgeHour, tz) != detector_id(after, KeyingMode::EdgeHour, tz));
    CHECK(detector_id(before, KeyingMode::Edge, tz) == detector_id(after, KeyingMode::Edge, tz));
}

TEST_CASE("first snapshot creates a detector and cannot fire") {
    Engine engine(adwin_config(KeyingMode::Edge, SignalKind::Delay));
    const auto ev = engine.process(make_snap("A", "B", 1000, 30));
    CHECK_FALSE(ev.has_value());
    CHECK(engine.stats().detectors_created == 1);
    CHECK(engine.stats().processed == 1);
}

TEST_CASE("edge-keyed delay stream matches the exact detector oracle") {
    // 600 on-time snapshots, then 600 delayed by ~120s.
    std::vector<VehicleSnapshot> stream;
    auto noise = oracles::gaussian_values(987, 1200, 0.0, 5.0);
    for (int i = 0; i < 1200; ++i) {
        const std::int64_t d =
            static_cast<std::int64_t>(std::llround(noise[i])) + (i < 600 ? 0 : 120);
        stream.push_back(make_snap("A", "B", 1000 + i * 30, d));
    }

    Engine engine(adwin_config(KeyingMode::Edge, SignalKind::Delay));
    oracles::ExactAdwin oracle(0.002);
    std::vector<int> engine_hits, oracle_hits;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (auto ev = engine.process(stream[i])) {
            engine_hits.push_back(static_cast<int>(i));
            CHECK(ev->direction == ChangeDirection::Increase);
            CHECK(ev->key.encode() == "B|A");
        }
        const auto d = delay(stream[i]);
        REQUIRE(d.has_value());
        if (oracle.add_value(static_cast<double>(*d))) oracle_hits.push_back(static_cast<int>(i));
    }
    REQUIRE(!oracle_hits.empty());
    REQUIRE(engine_hits.size() == oracle_hits.size());
    for (std::size_t k = 0; k < engine_hits.size(); ++k) {
        CHECK(std::abs(engine_hits[k] - oracle_hits[k]) <= 32);
    }
}

TEST_CASE("bin mode routes same-hour traffic to one detector across days") {
    // Same stream, but every event inside 08:00-09:00 over several days:
    // the (edge, 08) bin sees the identical value sequence, so detections
    // match the edge-keyed run.
    std::vector<VehicleSnapshot> edge_stream, bin_stream;
    auto noise = oracles::gaussian_values(5150, 900, 0.0, 5.0);
    const auto base = *parse_rfc3339("2021-12-01T08:00:00Z");
    for (int i = 0; i < 900; ++i) {
        const std::int64_t d =
            static_cast<std::int64_t>(std::llround(noise[i])) + (i < 450 ? 0 : 90);
        // 30 events per day, 2 minutes apart, all inside the 08 hour
        const int day = i / 30;
        const int slot = i % 30;
        const unix_time_t t = base + day * kSecondsPerDay + slot * 120;
        edge_stream.push_back(make_snap("A", "B", 1000 + i * 30, d));
        bin_stream.push_back(make_snap("A", "B", t, d));
    }
    auto edge_result = run_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay), edge_stream);
    auto bin_result = run_engine(adwin_config(KeyingMode::EdgeHour, SignalKind::Delay), bin_stream);
    CHECK(bin_result.stats.detectors_created == 1);
    REQUIRE(edge_result.events.size() == bin_result.events.size());
    for (std::size_t i = 0; i < edge_result.events.size(); ++i) {
        CHECK(edge_result.events[i].seq == bin_result.events[i].seq);
        CHECK(edge_result.events[i].value == bin_result.events[i].value);
        CHECK(bin_result.events[i].key.encode() == "B|A|08");
    }
}

TEST_CASE("registry cardinality equals distinct keys") {
    std::vector<VehicleSnapshot> stream;
    const auto base = *parse_rfc3339("2021-12-01T05:00:00Z");
    // 6 edges, 40 snapshots each, spread over 5 distinct hours
    for (int e = 0; e < 6; ++e) {
        for (int i = 0; i < 40; ++i) {
            const std::string prev = "S" + std::to_string(e);
            const std::string curr = "S" + std::to_string(e + 1);
            const unix_time_t t = base + (i % 5) * kSecondsPerHour + i * 7 + e;
            stream.push_back(make_snap(prev, curr, t, i % 9, 0, "c-" + std::to_string(e)));
        }
    }
    std::sort(stream.begin(), stream.end(),
              [](const auto& a, const auto& b) { return a.event_time < b.event_time; });

    const auto tz = Timezone::utc();
    auto edge_result = run_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay), stream);
    const auto edge_counts = shuffle_preview(stream, KeyingMode::Edge, tz);
    CHECK(edge_result.stats.detectors_created == edge_counts.size());
    CHECK(edge_counts.size() == 6);

    auto bin_result = run_engine(adwin_config(KeyingMode::EdgeHour, SignalKind::Delay), stream);
    const auto bin_counts = shuffle_preview(stream, KeyingMode::EdgeHour, tz);
    CHECK(bin_result.stats.detectors_created == bin_counts.size());
    CHECK(bin_counts.size() == 6 * 5);

    // per-edge bin count stays within 24
    std::map<std::string, int> per_edge;
    for (const auto& [key, n] : bin_counts) {
        per_edge[key.substr(0, key.rfind('|'))] += 1;
    }
    for (const auto& [edge, bins] : per_edge) CHECK(bins <= 24);

    // preview counts match engine observation counts
    CHECK(edge_result.stats.per_key_observations == edge_counts);
    CHECK(bin_result.stats.per_key_observations == bin_counts);
}

TEST_CASE("partitioning by key preserves per-key detections") {
    std::vector<VehicleSnapshot> stream;
    auto noise = oracles::gaussian_values(31337, 1600, 0.0, 4.0);
    const auto base = *parse_rfc3339("2021-12-01T05:00:00Z");
    for (int i = 0; i < 1600; ++i) {
        const int e = i % 4;
        const std::string prev = "P" + std::to_string(e);
        const std::string curr = "Q" + std::to_string(e);
        const std::int64_t d =
            static_cast<std::int64_t>(std::llround(noise[i])) + (i > 800 && e == 2 ? 60 : 0);
        stream.push_back(make_snap(prev, curr, base + i * 11, d, 0, "c-" + std::to_string(e)));
    }
    const auto whole = run_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay), stream);

    // by-hand partition: one engine per key, fed in stream order
    std::map<std::string, Engine> engines;
    std::map<std::string, std::vector<std::pair<std::uint64_t, std::int64_t>>> split_events;
    const auto tz = Timezone::utc();
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto key = detector_id(stream[i], KeyingMode::Edge, tz).encode();
        auto [it, inserted] =
            engines.try_emplace(key, adwin_config(KeyingMode::Edge, SignalKind::Delay));
        if (auto ev = it->second.process_with_seq(stream[i], i)) {
            split_events[key].push_back({ev->seq, ev->value});
        }
    }
    std::map<std::string, std::vector<std::pair<std::uint64_t, std::int64_t>>> whole_events;
    for (const auto& ev : whole.events) {
        whole_events[ev.key.encode()].push_back({ev.seq, ev.value});
    }
    CHECK(whole_events == split_events);
    CHECK(!whole.events.empty());
}

TEST_CASE("worker count does not change the result") {
    std::vector<VehicleSnapshot> stream;
    auto noise = oracles::gaussian_values(606, 2000, 0.0, 6.0);
    const auto base = *parse_rfc3339("2021-12-01T05:00:00Z");
    for (int i = 0; i < 2000; ++i) {
        const int e = i % 7;
        const std::int64_t d =
            static_cast<std::int64_t>(std::llround(noise[i])) + (i > 1200 && e < 2 ? 80 : 0);
        stream.push_back(make_snap("P" + std::to_string(e), "Q" + std::to_string(e), base + i * 9,
                                   d, 0, "c-" + std::to_string(e)));
    }
    const auto config = adwin_config(KeyingMode::Edge, SignalKind::Delay);
    const auto one = run_engine(config, stream, 1);
    const auto four = run_engine(config, stream, 4);
    REQUIRE(one.events.size() == four.events.size());
    for (std::size_t i = 0; i < one.events.size(); ++i) {
        CHECK(one.events[i].seq == four.events[i].seq);
        CHECK(one.events[i].key == four.events[i].key);
        CHECK(one.events[i].value == four.events[i].value);
        CHECK(one.events[i].lat == four.events[i].lat);
        CHECK(one.events[i].lon == four.events[i].lon);
    }
    CHECK(one.stats.per_key_observations == four.stats.per_key_observations);
    CHECK(one.stats.per_day_processed == four.stats.per_day_processed);
}

TEST_CASE("unusable records change no detector state") {
    std::vector<VehicleSnapshot> clean;
    auto noise = oracles::gaussian_values(8080, 800, 0.0, 5.0);
    for (int i = 0; i < 800; ++i) {
        const std::int64_t d =
            static_cast<std::int64_t>(std::llround(noise[i])) + (i < 400 ? 0 : 100);
        clean.push_back(make_snap("A", "B", 1000 + i * 20, d));
    }
    std::vector<VehicleSnapshot> dirty;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        dirty.push_back(clean[i]);
        if (i % 5 == 0) {
            auto broken = clean[i];
            broken.sched_dep_curr.reset();  // unusable for any signal
            broken.event_time += 1;
            dirty.push_back(broken);
            auto out_of_service = clean[i];
            out_of_service.in_service = false;
            out_of_service.event_time += 2;
            dirty.push_back(out_of_service);
        }
    }
    const auto config = adwin_config(KeyingMode::Edge, SignalKind::Delay);
    const auto a = run_engine(config, clean);
    const auto b = run_engine(config, dirty);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].value == b.events[i].value);
        CHECK(a.events[i].event_time == b.events[i].event_time);
    }
    CHECK(b.stats.skipped_unusable == 160);
    CHECK(b.stats.skipped_not_in_service == 160);
    CHECK(a.stats.processed == b.stats.processed);
}

TEST_CASE("delta signal feeds exactly the delta delay values") {
    std::vector<double> fed;
    std::deque<std::vector<double>> sinks;
    Engine::DetectorFactory factory = [&](const DetectorConfig& config) {
        sinks.emplace_back();
        return std::make_unique<RecordingDetector>(make_detector(config), &sinks.back());
    };
    EngineConfig config = adwin_config(KeyingMode::Edge, SignalKind::DeltaDelay);
    Engine engine(config, factory);

    std::vector<std::int64_t> expected;
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
        const std::int64_t d = static_cast<std::int64_t>(rng() % 240) - 120;
        const std::int64_t d_prev = static_cast<std::int64_t>(rng() % 240) - 120;
        auto s = make_snap("A", "B", 1000 + i * 15, d, d_prev);
        expected.push_back(d - d_prev);
        engine.process(s);
    }
    REQUIRE(sinks.size() == 1);
    REQUIRE(sinks.front().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(sinks.front()[i] == static_cast<double>(expected[i]));
    }
    (void)fed;
}

TEST_CASE("records lacking previous-stop data are skipped in delta mode only") {
    auto s = make_snap("A", "B", 5000, 42);
    s.real_dep_prev.reset();
    s.sched_dep_prev.reset();

    Engine delay_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay));
    delay_engine.process(s);
    CHECK(delay_engine.stats().processed == 1);

    Engine delta_engine(adwin_config(KeyingMode::Edge, SignalKind::DeltaDelay));
    delta_engine.process(s);
    CHECK(delta_engine.stats().processed == 0);
    CHECK(delta_engine.stats().skipped_unusable == 1);
    CHECK(delta_engine.stats().detectors_created == 0);
}

TEST_CASE("late records are dropped by the run drivers") {
    std::vector<VehicleSnapshot> stream;
    stream.push_back(make_snap("A", "B", 10000, 5));
    stream.push_back(make_snap("A", "B", 10060, 5));   // fine
    stream.push_back(make_snap("A", "B", 9980, 5));    // 80s behind: within tolerance
    stream.push_back(make_snap("A", "B", 9000, 5));    // 1060s behind: late
    stream.push_back(make_snap("A", "B", 10120, 5));
    const auto result = run_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay), stream);
    CHECK(result.stats.skipped_late == 1);
    CHECK(result.stats.processed == 4);

    // same through the streaming driver
    std::size_t i = 0;
    const auto streamed = run_engine_stream(
        adwin_config(KeyingMode::Edge, SignalKind::Delay),
        [&]() -> std::optional<VehicleSnapshot> {
            if (i >= stream.size()) return std::nullopt;
            return stream[i++];
        });
    CHECK(streamed.stats.skipped_late == 1);
    CHECK(streamed.stats.processed == 4);
}

TEST_CASE("empty source yields nothing") {
    const auto result = run_engine(adwin_config(KeyingMode::Edge, SignalKind::Delay), {});
    CHECK(result.events.empty());
    CHECK(result.stats.detectors_created == 0);
    CHECK(result.stats.processed == 0);
}

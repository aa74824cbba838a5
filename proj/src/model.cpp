#include "sdcd/model.hpp"

namespace sdcd {

std::optional<std::int64_t> delay(const VehicleSnapshot& s) {
    if (!s.in_service || !s.real_dep_curr || !s.sched_dep_curr) return std::nullopt;
    return *s.real_dep_curr - *s.sched_dep_curr;
}

std::optional<std::int64_t> delta_delay(const VehicleSnapshot& s) {
    if (s.course.empty()) return std::nullopt;
    const auto d_curr = delay(s);
    if (!d_curr || !s.real_dep_prev || !s.sched_dep_prev) return std::nullopt;
    const std::int64_t d_prev = *s.real_dep_prev - *s.sched_dep_prev;
    return *d_curr - d_prev;
}

bool is_structurally_valid(const VehicleSnapshot& s) {
    if (s.curr_stop.empty() || s.prev_stop.empty() || s.curr_stop == s.prev_stop) return false;
    if (s.real_dep_curr && s.real_dep_prev && *s.real_dep_prev > *s.real_dep_curr) return false;
    if (s.sched_dep_curr && s.sched_dep_prev && *s.sched_dep_prev > *s.sched_dep_curr) return false;
    if (s.real_dep_curr && s.event_time < *s.real_dep_curr) return false;
    return true;
}

bool extend_graph(TransportGraph& graph, const VehicleSnapshot& s) {
    if (s.prev_stop.empty() || s.curr_stop.empty() || s.prev_stop == s.curr_stop) return false;
    graph.stops.insert(s.prev_stop);
    graph.stops.insert(s.curr_stop);
    graph.edges.insert(Edge{s.prev_stop, s.curr_stop});
    return true;
}

std::optional<DelayObservation> make_observation(const VehicleSnapshot& s, const Timezone& tz) {
    const auto d = delay(s);
    if (!d || s.prev_stop.empty() || s.prev_stop == s.curr_stop) return std::nullopt;
    DelayObservation obs;
    obs.edge = Edge{s.prev_stop, s.curr_stop};
    obs.event_time = s.event_time;
    obs.course = s.course;
    obs.d = *d;
    obs.delta_d = delta_delay(s);
    obs.hour = tz.hour_of_day(s.event_time);
    return obs;
}

}  // namespace sdcd

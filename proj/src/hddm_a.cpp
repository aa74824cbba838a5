#include "sdcd/detectors/hddm_a.hpp"

#include <cmath>
#include <stdexcept>

namespace sdcd {

HddmA::HddmA(const DetectorConfig& config) : confidence_(config.confidence) {}

void HddmA::reset_cuts() {
    total_n_ = 0;
    total_norm_ = 0.0;
    total_raw_ = 0.0;
    min_cut_ = Cut{};
    max_cut_ = Cut{};
}

bool HddmA::add_value(double value) {
    if (!std::isfinite(value)) return false;
    detection_pending_ = false;
    ++observed_;

    if (!extrema_set_) {
        lo_ = hi_ = value;
        extrema_set_ = true;
    } else {
        if (value < lo_) lo_ = value;
        if (value > hi_) hi_ = value;
    }
    const double norm = hi_ > lo_ ? (value - lo_) / (hi_ - lo_) : 0.0;

    ++total_n_;
    total_norm_ += norm;
    total_raw_ += value;
    if (min_cut_.n == 0) min_cut_ = Cut{total_n_, total_norm_, total_raw_};
    if (max_cut_.n == 0) max_cut_ = Cut{total_n_, total_norm_, total_raw_};

    const double total_mean = total_norm_ / static_cast<double>(total_n_);
    const double bound_total = hoeffding_bound(total_n_, confidence_);

    // Move a cut forward when the running prefix beats its envelope edge.
    const double min_mean = min_cut_.sum_norm / static_cast<double>(min_cut_.n);
    if (min_mean + hoeffding_bound(min_cut_.n, confidence_) >= total_mean + bound_total) {
        min_cut_ = Cut{total_n_, total_norm_, total_raw_};
    }
    const double max_mean = max_cut_.sum_norm / static_cast<double>(max_cut_.n);
    if (max_mean - hoeffding_bound(max_cut_.n, confidence_) <= total_mean - bound_total) {
        max_cut_ = Cut{total_n_, total_norm_, total_raw_};
    }

    auto drift_from = [&](const Cut& cut, bool increase) -> bool {
        if (cut.n == total_n_) return false;
        const double n = static_cast<double>(total_n_);
        const double nc = static_cast<double>(cut.n);
        const double m = (n - nc) / (nc * n);
        const double eps = std::sqrt(m / 2.0 * std::log(2.0 / confidence_));
        const double cut_mean = cut.sum_norm / nc;
        const double diff = increase ? total_mean - cut_mean : cut_mean - total_mean;
        return diff >= eps;
    };

    const Cut* fired = nullptr;
    if (drift_from(min_cut_, true)) {
        fired = &min_cut_;
    } else if (drift_from(max_cut_, false)) {
        fired = &max_cut_;
    }
    if (fired != nullptr) {
        const double pre = fired->sum_raw / static_cast<double>(fired->n);
        const double post = (total_raw_ - fired->sum_raw) /
                            static_cast<double>(total_n_ - fired->n);
        last_means_ = MeanPair{pre, post};
        detection_pending_ = true;
        reset_cuts();
    }
    return detection_pending_;
}

MeanPair HddmA::pre_post_means() const {
    if (!detection_pending_) throw std::logic_error("hddm_a: no detection pending");
    return last_means_;
}

std::uint64_t HddmA::state_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mixd = [&h](double v) {
        std::uint64_t bits;
        __builtin_memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 1099511628211ULL;
    };
    mixd(lo_);
    mixd(hi_);
    mixd(total_norm_);
    mixd(static_cast<double>(total_n_));
    mixd(min_cut_.sum_norm);
    mixd(static_cast<double>(min_cut_.n));
    mixd(max_cut_.sum_norm);
    mixd(static_cast<double>(max_cut_.n));
    return h;
}

}  // namespace sdcd

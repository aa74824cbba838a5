#include "sdcd/detectors/kswin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdcd {

Kswin::Kswin(const DetectorConfig& config)
    : window_size_(config.kswin_window), stat_size_(config.kswin_stat) {
    const std::size_t n = window_size_ - stat_size_;
    const std::size_t m = stat_size_;
    const double c = std::sqrt(-std::log(config.confidence / 2.0) / 2.0);
    threshold_ = c * std::sqrt(static_cast<double>(n + m) /
                               (static_cast<double>(n) * static_cast<double>(m)));
}

bool Kswin::add_value(double value) {
    if (!std::isfinite(value)) return false;
    detection_pending_ = false;
    ++observed_;

    window_.push_back(value);
    if (window_.size() > window_size_) window_.pop_front();
    if (window_.size() < window_size_) return false;

    const std::size_t older_n = window_size_ - stat_size_;
    older_buf_.assign(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(older_n));
    recent_buf_.assign(window_.begin() + static_cast<std::ptrdiff_t>(older_n), window_.end());
    std::sort(older_buf_.begin(), older_buf_.end());
    std::sort(recent_buf_.begin(), recent_buf_.end());

    last_stat_ = ks_statistic(older_buf_, recent_buf_);
    if (last_stat_ > threshold_) {
        const double older_mean =
            std::accumulate(older_buf_.begin(), older_buf_.end(), 0.0) /
            static_cast<double>(older_buf_.size());
        const double recent_mean =
            std::accumulate(recent_buf_.begin(), recent_buf_.end(), 0.0) /
            static_cast<double>(recent_buf_.size());
        last_means_ = MeanPair{older_mean, recent_mean};
        detection_pending_ = true;
    }
    return detection_pending_;
}

MeanPair Kswin::pre_post_means() const {
    if (!detection_pending_) throw std::logic_error("kswin: no detection pending");
    return last_means_;
}

std::uint64_t Kswin::state_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : window_) {
        std::uint64_t bits;
        __builtin_memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace sdcd

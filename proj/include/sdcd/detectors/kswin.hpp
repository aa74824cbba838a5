#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "sdcd/detectors/change_detector.hpp"

namespace sdcd {

// Sliding-window Kolmogorov-Smirnov detector. Keeps the most recent
// `kswin_window` values; once full, compares the older part (window - stat
// values) against the recent `kswin_stat` values. A change is reported when
//   ks_statistic(older, recent) > c(alpha) * sqrt((n+m)/(n*m)),
//   c(alpha) = sqrt(-ln(alpha/2) / 2).
// The window keeps sliding after a detection; nothing is discarded.
class Kswin final : public ChangeDetector {
public:
    explicit Kswin(const DetectorConfig& config);

    bool add_value(double value) override;
    MeanPair pre_post_means() const override;
    std::uint64_t observed_count() const override { return observed_; }
    DetectorKind kind() const override { return DetectorKind::Kswin; }
    std::uint64_t state_digest() const override;

    double threshold() const { return threshold_; }
    double last_statistic() const { return last_stat_; }

private:
    std::size_t window_size_;
    std::size_t stat_size_;
    double threshold_;
    std::deque<double> window_;  // oldest first
    std::uint64_t observed_ = 0;
    bool detection_pending_ = false;
    double last_stat_ = 0.0;
    MeanPair last_means_{};
    mutable std::vector<double> older_buf_, recent_buf_;
};

}  // namespace sdcd

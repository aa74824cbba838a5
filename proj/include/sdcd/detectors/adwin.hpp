#pragma once

#include <deque>

#include "sdcd/detectors/change_detector.hpp"
#include "sdcd/detectors/window_stats.hpp"

namespace sdcd {

// Adaptive-window mean-change detector. The window is an exponential
// histogram of buckets (at most `adwin_bucket_rows_max` buckets per capacity
// tier); every admissible cut between buckets is tested with
//   eps_cut = sqrt((2/m) * var_W * ln(2/d')) + (2/(3m)) * ln(2/d'),
//   m  = 1 / (1/n0 + 1/n1),   d' = delta / n.
// When cuts fire, the older sub-window of the most significant one is
// discarded, so the window lands on the new regime within the insertion that
// completed the change.
class Adwin final : public ChangeDetector {
public:
    explicit Adwin(const DetectorConfig& config);

    bool add_value(double value) override;
    MeanPair pre_post_means() const override;
    std::uint64_t observed_count() const override { return observed_; }
    DetectorKind kind() const override { return DetectorKind::Adwin; }
    std::uint64_t state_digest() const override;

    std::uint64_t window_length() const { return total_.count; }
    double window_mean() const { return total_.count ? total_.mean : 0.0; }
    double window_variance() const { return total_.variance(); }
    std::size_t bucket_count() const { return buckets_.size(); }

private:
    struct Bucket {
        WindowStats stats;  // stats.count is always a power of two
    };

    void compress();
    bool shrink_while_cut_found();
    void discard_prefix(std::size_t bucket_count);

    double delta_;
    std::size_t max_per_tier_;
    std::deque<Bucket> buckets_;  // oldest first
    WindowStats total_;
    std::uint64_t observed_ = 0;
    std::uint64_t since_last_check_ = 0;
    bool detection_pending_ = false;
    MeanPair last_cut_{};

    static constexpr std::uint64_t kMinWindowForCheck = 16;
    static constexpr std::uint64_t kMinSubWindow = 5;
    // Above this window length, cuts are checked only every kCheckStride
    // insertions to bound per-value cost on hot keys.
    static constexpr std::uint64_t kStrideThreshold = 1024;
    static constexpr std::uint64_t kCheckStride = 32;
};

}  // namespace sdcd

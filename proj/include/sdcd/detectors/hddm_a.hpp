#pragma once

#include "sdcd/detectors/change_detector.hpp"

namespace sdcd {

// Hoeffding-bound drift detector over running means (the averaged variant).
// Values are min-max normalized into [0,1] with running extrema, since the
// Hoeffding inequality needs bounded variables; raw sums are carried along so
// pre/post means can be reported in the original unit.
//
// The detector tracks the prefix ("cut") minimizing mean + bound and the one
// maximizing mean - bound. Drift fires when the overall mean leaves the
// Hoeffding envelope of either cut:
//   |mean_total - mean_cut| >= sqrt(m/2 * ln(2/confidence)),
//   m = (n - n_cut) / (n_cut * n).
// Cut statistics reset after each drift; the normalization extrema persist.
class HddmA final : public ChangeDetector {
public:
    explicit HddmA(const DetectorConfig& config);

    bool add_value(double value) override;
    MeanPair pre_post_means() const override;
    std::uint64_t observed_count() const override { return observed_; }
    DetectorKind kind() const override { return DetectorKind::HddmA; }
    std::uint64_t state_digest() const override;

private:
    struct Cut {
        std::uint64_t n = 0;
        double sum_norm = 0.0;
        double sum_raw = 0.0;
    };

    void reset_cuts();

    double confidence_;
    double lo_ = 0.0, hi_ = 0.0;
    bool extrema_set_ = false;
    std::uint64_t total_n_ = 0;
    double total_norm_ = 0.0;
    double total_raw_ = 0.0;
    Cut min_cut_;  // prefix minimizing mean + bound (watches increases)
    Cut max_cut_;  // prefix maximizing mean - bound (watches decreases)
    std::uint64_t observed_ = 0;
    bool detection_pending_ = false;
    MeanPair last_means_{};
};

}  // namespace sdcd

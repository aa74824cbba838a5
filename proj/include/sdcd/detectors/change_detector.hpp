#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sdcd {

enum class DetectorKind { Adwin, Kswin, HddmA };

std::string_view to_string(DetectorKind kind);

struct DetectorConfig {
    DetectorKind kind = DetectorKind::Adwin;
    // delta for ADWIN, alpha for KSWIN, drift confidence for HDDM_A.
    double confidence = 0.002;
    std::size_t kswin_window = 100;
    std::size_t kswin_stat = 30;
    // Max buckets ADWIN keeps per capacity tier before merging the two oldest.
    std::size_t adwin_bucket_rows_max = 5;

    // Throws std::invalid_argument when out of range.
    void validate() const;
};

struct MeanPair {
    double pre = 0.0;
    double post = 0.0;
};

// Incremental change detector. Feed one value at a time; add_value returns
// true iff that value completed a statistically significant change at the
// configured confidence. Single-writer: one logical thread per instance.
class ChangeDetector {
public:
    virtual ~ChangeDetector() = default;

    // Non-finite values are rejected and leave the state untouched.
    virtual bool add_value(double value) = 0;

    // Means of the two sub-windows whose difference triggered the most recent
    // detection. Only valid immediately after add_value returned true; throws
    // std::logic_error otherwise.
    virtual MeanPair pre_post_means() const = 0;

    virtual std::uint64_t observed_count() const = 0;
    virtual DetectorKind kind() const = 0;

    // Order-sensitive digest of the internal state; used by tests to show
    // that skipped records leave detectors untouched.
    virtual std::uint64_t state_digest() const = 0;
};

std::unique_ptr<ChangeDetector> make_detector(const DetectorConfig& config);

// Sup-norm distance between the empirical CDFs of two samples, evaluated at
// the union of sample points with the right-continuous convention. Inputs
// must be sorted ascending and non-empty (throws std::invalid_argument).
double ks_statistic(const std::vector<double>& sorted_a, const std::vector<double>& sorted_b);

// Hoeffding deviation bound sqrt(ln(1/confidence) / (2n)) for the mean of n
// values in [0,1].
double hoeffding_bound(std::uint64_t n, double confidence);

}  // namespace sdcd

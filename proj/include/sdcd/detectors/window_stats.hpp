#pragma once

#include <cstdint>

namespace sdcd {

// Mergeable count/mean/variance summary. Merging two summaries is exact in
// count and agrees with recomputation from raw values to floating-point
// accuracy, which is what lets ADWIN compress its window into buckets.
struct WindowStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the mean

    void add(double value);
    void merge(const WindowStats& other);
    // Removes a summarized prefix. `part` must describe a subset previously
    // merged into this summary.
    void subtract(const WindowStats& part);

    double sum() const { return mean * static_cast<double>(count); }
    // Population variance.
    double variance() const;
};

}  // namespace sdcd

#include "sdcd/detectors/window_stats.hpp"

namespace sdcd {

void WindowStats::add(double value) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
}

void WindowStats::merge(const WindowStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(other.count);
    const double d = other.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += other.m2 + d * d * n1 * n2 / n;
    count += other.count;
}

void WindowStats::subtract(const WindowStats& part) {
    if (part.count == 0) return;
    if (part.count >= count) {
        *this = WindowStats{};
        return;
    }
    const double n = static_cast<double>(count);
    const double np = static_cast<double>(part.count);
    const double nr = n - np;
    const double rest_mean = (mean * n - part.mean * np) / nr;
    const double d = part.mean - rest_mean;
    double rest_m2 = m2 - part.m2 - d * d * np * nr / n;
    if (rest_m2 < 0.0) rest_m2 = 0.0;  // guard against rounding
    count -= part.count;
    mean = rest_mean;
    m2 = rest_m2;
}

double WindowStats::variance() const {
    if (count == 0) return 0.0;
    double v = m2 / static_cast<double>(count);
    return v < 0.0 ? 0.0 : v;
}

}  // namespace sdcd

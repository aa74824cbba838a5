#include "sdcd/detectors/change_detector.hpp"

#include <cmath>
#include <stdexcept>

#include "sdcd/detectors/adwin.hpp"
#include "sdcd/detectors/hddm_a.hpp"
#include "sdcd/detectors/kswin.hpp"

namespace sdcd {

std::string_view to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::Adwin: return "adwin";
        case DetectorKind::Kswin: return "kswin";
        case DetectorKind::HddmA: return "hddm";
    }
    return "unknown";
}

void DetectorConfig::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("detector confidence must be in (0,1)");
    if (kswin_window == 0) throw std::invalid_argument("kswin_window must be positive");
    if (kswin_stat == 0 || kswin_stat >= kswin_window)
        throw std::invalid_argument("kswin_stat must be positive and smaller than kswin_window");
    if (adwin_bucket_rows_max == 0)
        throw std::invalid_argument("adwin_bucket_rows_max must be positive");
}

std::unique_ptr<ChangeDetector> make_detector(const DetectorConfig& config) {
    config.validate();
    switch (config.kind) {
        case DetectorKind::Adwin: return std::make_unique<Adwin>(config);
        case DetectorKind::Kswin: return std::make_unique<Kswin>(config);
        case DetectorKind::HddmA: return std::make_unique<HddmA>(config);
    }
    throw std::invalid_argument("unknown detector kind");
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        const double diff = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
        if (diff > best) best = diff;
    }
    // Once one sample is exhausted its eCDF sits at 1 and later union points
    // only shrink the gap, so the loop has already seen the supremum.
    return best;
}

double hoeffding_bound(std::uint64_t n, double confidence) {
    if (n == 0) throw std::invalid_argument("hoeffding_bound: n must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("hoeffding_bound: confidence must be in (0,1)");
    return std::sqrt(std::log(1.0 / confidence) / (2.0 * static_cast<double>(n)));
}

}  // namespace sdcd

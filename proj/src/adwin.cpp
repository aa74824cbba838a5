#include "sdcd/detectors/adwin.hpp"

#include <cmath>
#include <stdexcept>

namespace sdcd {

Adwin::Adwin(const DetectorConfig& config)
    : delta_(config.confidence), max_per_tier_(config.adwin_bucket_rows_max) {}

bool Adwin::add_value(double value) {
    if (!std::isfinite(value)) return false;
    detection_pending_ = false;
    ++observed_;

    Bucket b;
    b.stats.add(value);
    buckets_.push_back(b);
    total_.add(value);
    compress();

    ++since_last_check_;
    if (total_.count < kMinWindowForCheck) return false;
    if (total_.count > kStrideThreshold && since_last_check_ < kCheckStride) return false;
    since_last_check_ = 0;

    detection_pending_ = shrink_while_cut_found();
    return detection_pending_;
}

void Adwin::compress() {
    // Newest buckets hold one value each; when a tier exceeds the cap, its
    // two oldest buckets merge into the tier above. Buckets are oldest first,
    // so each tier occupies a contiguous run and the cascade walks upward.
    std::uint64_t tier_size = 1;
    std::size_t end = buckets_.size();  // one past the newest bucket of the tier
    while (end > 0) {
        std::size_t begin = end;
        while (begin > 0 && buckets_[begin - 1].stats.count == tier_size) --begin;
        if (end - begin <= max_per_tier_) break;
        buckets_[begin].stats.merge(buckets_[begin + 1].stats);
        buckets_.erase(buckets_.begin() + static_cast<std::ptrdiff_t>(begin) + 1);
        end = begin + 1;
        tier_size *= 2;
    }
}

bool Adwin::shrink_while_cut_found() {
    bool detected = false;
    while (total_.count >= kMinWindowForCheck) {
        const double n = static_cast<double>(total_.count);
        const double var_w = total_.variance();
        const double delta_prime = delta_ / n;
        const double ln_term = std::log(2.0 / delta_prime);

        // Most significant violating cut: largest margin over its bound.
        // Discarding its whole older side leaves the window on the new
        // regime, so one change yields one detection.
        std::size_t best_cut = 0;  // buckets [0, best_cut) form the older side
        double best_margin = 0.0;
        MeanPair best_means{};
        WindowStats prefix;
        for (std::size_t i = 0; i + 1 < buckets_.size(); ++i) {
            prefix.merge(buckets_[i].stats);
            const std::uint64_t n0 = prefix.count;
            const std::uint64_t n1 = total_.count - n0;
            if (n0 < kMinSubWindow) continue;
            if (n1 < kMinSubWindow) break;
            const double mean0 = prefix.mean;
            const double mean1 = (total_.sum() - prefix.sum()) / static_cast<double>(n1);
            const double m = 1.0 / (1.0 / static_cast<double>(n0) + 1.0 / static_cast<double>(n1));
            const double eps = std::sqrt((2.0 / m) * var_w * ln_term) + (2.0 / (3.0 * m)) * ln_term;
            const double margin = std::abs(mean0 - mean1) - eps;
            if (margin > 0.0 && margin > best_margin) {
                best_margin = margin;
                best_cut = i + 1;
                best_means = MeanPair{mean0, mean1};
            }
        }
        if (best_cut == 0) break;
        if (!detected) last_cut_ = best_means;
        detected = true;
        discard_prefix(best_cut);
    }
    return detected;
}

void Adwin::discard_prefix(std::size_t bucket_count) {
    buckets_.erase(buckets_.begin(), buckets_.begin() + static_cast<std::ptrdiff_t>(bucket_count));
    WindowStats fresh;
    for (const auto& b : buckets_) fresh.merge(b.stats);
    total_ = fresh;
}

MeanPair Adwin::pre_post_means() const {
    if (!detection_pending_) throw std::logic_error("adwin: no detection pending");
    return last_cut_;
}

std::uint64_t Adwin::state_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    auto mixd = [&](double v) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof v);
        __builtin_memcpy(&bits, &v, sizeof bits);
        mix(bits);
    };
    mix(total_.count);
    mixd(total_.mean);
    mixd(total_.m2);
    for (const auto& b : buckets_) {
        mix(b.stats.count);
        mixd(b.stats.mean);
        mixd(b.stats.m2);
    }
    return h;
}

}  // namespace sdcd

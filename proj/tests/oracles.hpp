#pragma once

// Independent reference implementations the tests check the production code
// against. Everything here favors obviousness over speed and stays clear of
// the code paths under test.

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

namespace oracles {

// Exact adaptive-window detector: raw value window, every split point
// checked on every insertion, window shrinks one element at a time. Same
// statistical rule as the production detector, none of its compression.
class ExactAdwin {
public:
    explicit ExactAdwin(double delta) : delta_(delta) {}

    bool add_value(double value);
    double pre_mean() const { return pre_mean_; }
    double post_mean() const { return post_mean_; }
    std::size_t window_length() const { return window_.size(); }

private:
    bool find_and_cut(bool record_means);

    double delta_;
    std::deque<double> window_;
    double pre_mean_ = 0.0;
    double post_mean_ = 0.0;
};

// Brute-force two-sample KS distance: evaluate both eCDFs at every union
// point by counting.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b);

// Sliding-window KS detector mirroring the production configuration but
// using brute_ks and explicit copies.
class BruteKswin {
public:
    BruteKswin(double alpha, std::size_t window, std::size_t stat);

    bool add_value(double value);
    double last_statistic() const { return last_stat_; }
    double threshold() const { return threshold_; }

private:
    std::size_t window_size_;
    std::size_t stat_size_;
    double threshold_;
    std::deque<double> window_;
    double last_stat_ = 0.0;
};

double brute_lower_median(std::vector<double> values);
double brute_population_std(const std::vector<double>& values);

// Deterministic N(0,1) stream; Box-Muller over mt19937_64 so streams do not
// depend on the standard library's distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next();

private:
    std::mt19937_64 rng_;
    std::optional<double> spare_;
};

std::vector<double> gaussian_values(std::uint64_t seed, std::size_t n, double mean = 0.0,
                                    double std_dev = 1.0);

}  // namespace oracles

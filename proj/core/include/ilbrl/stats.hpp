#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ilbrl {

/// 100 (J - J_random) / (J_expert - J_random). Throws InvalidArgument when
/// J_expert == J_random.
double normalized_score(double j, double j_random, double j_expert);

/// Interquartile mean with fractional trimming: n/4 of mass is removed from
/// each end of the sorted sample and boundary samples keep their partial
/// weight. Throws InvalidArgument on empty input.
double iqm(std::span<const double> samples);

/// Mean over tasks of the within-task IQM.
double aggregate_iqm(const std::vector<std::vector<double>>& tasks);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct Interval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap CI of aggregate_iqm. Every replicate resamples each
/// task with replacement, keeping its size; replicate r draws from
/// derive_seed(seed, "bootstrap", {r}), so any worker count gives the same
/// interval. Throws InvalidArgument for n_boot < 100, a level outside
/// (0, 1) or an empty task.
Interval stratified_bootstrap_iqm_ci(const std::vector<std::vector<double>>& tasks, int n_boot,
                                     double level, std::uint64_t seed, std::size_t workers = 1);

/// mean +- z_{(1+level)/2} s / sqrt(n), s the n-1 standard deviation.
Interval mean_normal_ci(std::span<const double> samples, double level = 0.95);

/// Fraction of scores strictly above each threshold.
std::vector<double> performance_profile(std::span<const double> scores,
                                        std::span<const double> thresholds);

/// "threshold,fraction" CSV with a header row.
std::string format_profile_csv(std::span<const double> thresholds,
                               std::span<const double> fractions);

}  // namespace ilbrl

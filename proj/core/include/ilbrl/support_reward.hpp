#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ilbrl {

/// Feature vectors phi(s, a) of fixed dimension, stored row-major.
struct FeatureDataset {
    std::size_t dimension = 0;
    std::vector<double> coords;
    std::vector<bool> expert;

    std::size_t size() const noexcept { return expert.size(); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * dimension, dimension};
    }
    void add(std::span<const double> x, bool is_expert);

    /// Throws ModelError if coords and flags disagree or dimension is 0.
    void validate() const;
    /// The expert-flagged points as their own dataset.
    FeatureDataset experts() const;
};

/// Euclidean distance, summing squared coordinate gaps in index order.
double euclidean(std::span<const double> a, std::span<const double> b);

/// Exact nearest-expert distance by a scan over every expert point.
double nearest_distance(std::span<const double> x, const FeatureDataset& experts);

/// Exact nearest-neighbour index over a fixed point set. Agrees bit for bit
/// with nearest_distance.
class KdTree {
public:
    explicit KdTree(const FeatureDataset& points);
    ~KdTree();
    KdTree(KdTree&&) noexcept;
    KdTree& operator=(KdTree&&) noexcept;

    double nearest_distance(std::span<const double> x) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// max over points of the nearest-expert distance. Throws InvalidArgument if
/// there is no expert point.
double compute_dmax(const FeatureDataset& data);

/// 1 - sqrt(distance / d_max) clamped to [0, 1]; with d_max = 0 it is 1 at
/// distance 0 and 0 elsewhere.
double support_reward_from_distance(double distance, double d_max);

/// max over experts e of 1 - ||x - e||^(1/2) / sqrt(d_max), clamped to [0, 1].
/// Throws InvalidArgument on an empty expert set or negative d_max.
double soft_support_reward(std::span<const double> x, const FeatureDataset& experts, double d_max);

enum class NeighbourSearch { Scan, KdTree };

/// compute_dmax followed by soft_support_reward on every point, in order.
std::vector<double> label_dataset(const FeatureDataset& data,
                                  NeighbourSearch search = NeighbourSearch::Scan,
                                  std::size_t workers = 1);

/// Feature file:
///
///     # ilbrl-features 1 dimension=<d>
///     <expert flag 0|1> <x_1> ... <x_d>
///
/// one point per line.
std::string format_features(const FeatureDataset& data);
FeatureDataset parse_features(std::string_view contents);

/// One reward per line, aligned with the feature file.
std::string format_rewards(std::span<const double> rewards);

}  // namespace ilbrl

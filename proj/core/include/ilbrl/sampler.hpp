#pragma once

#include "ilbrl/dataset.hpp"
#include "ilbrl/mdp.hpp"

#include <cstdint>
#include <vector>

namespace ilbrl {

/// Successor-state samples for every (s, a), as delivered by the parallel
/// sampling model. Bucket (s, a) lives at index s * A + a and holds exactly
/// per_pair_count next states.
struct ParallelSamples {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    int per_pair_count = 0;
    int thinning_period = 1;
    long long raw_steps = 0;
    std::vector<std::vector<int>> buckets;

    const std::vector<int>& bucket(std::size_t s, std::size_t a) const {
        return buckets[s * num_actions + a];
    }

    /// Samples [i m, (i + 1) m) of every bucket. Throws InvalidArgument if
    /// the slice runs past per_pair_count.
    ParallelSamples slice(int i, int m) const;
};

struct SamplerOptions {
    /// Step budget = safety_factor * per_pair_count * exploration bound.
    double safety_factor = 3.0;
    /// When positive, replaces the computed budget.
    long long max_steps = 0;
};

/// Fills every bucket from a single exploratory rollout thinned with period
/// T = thinning_period(t_mix, p_min): after a burn-in of T steps, the
/// transition taken at every T-th step goes into its bucket unless that
/// bucket is already full. Throws CoverageError (with the steps used) when
/// the budget runs out first.
ParallelSamples simulate_parallel_sampler(const TabularMdp& mdp, const StochasticPolicy& explore,
                                          int per_pair_count, double p_min, int t_mix,
                                          double delta_second, std::uint64_t seed,
                                          const SamplerOptions& options = {});

/// The idealised model itself: per_pair_count independent draws from each
/// P(s, a, .).
ParallelSamples ideal_parallel_samples(const TabularMdp& mdp, int per_pair_count,
                                       std::uint64_t seed);

/// Buckets built from logged transitions, taking every `thinning`-th record
/// in order and keeping the first per_pair_count per (s, a). Throws
/// CoverageError if some bucket stays short.
ParallelSamples buckets_from_dataset(const TransitionDataset& data, int per_pair_count,
                                     int thinning = 1);

}  // namespace ilbrl

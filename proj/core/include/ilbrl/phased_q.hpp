#pragma once

#include "ilbrl/mdp.hpp"
#include "ilbrl/sampler.hpp"

#include <vector>

namespace ilbrl {

/// One phase: Q'(s, a) = r(s, a) + gamma * mean_k max_a' Q(s'_k, a') over
/// every sample in bucket (s, a). Throws InvalidArgument on an empty bucket
/// or mismatched dimensions.
ValueTable phased_q_update(const ValueTable& q, const ParallelSamples& samples,
                           const Matrix& reward, double gamma);

struct PhasedQResult {
    ValueTable q;
    DeterministicPolicy policy;
    /// V_i = max_a Q_i(., a) for phases i = 0 .. l-1, i.e. the functions the
    /// empirical bootstrap averaged.
    std::vector<Vector> bootstrap_values;
    int samples_per_phase = 0;
};

/// l phases from Q_0 = 0, phase i consuming slice i of m = per_pair_count / l
/// samples per pair (slices are disjoint). Throws InvalidArgument when
/// per_pair_count < l.
PhasedQResult phased_q_learn(const ParallelSamples& samples, const Matrix& reward, double gamma,
                             int ell);

/// Same recursion with the bucket mean replaced by the exact expectation
/// under P. Equals l steps of value iteration.
PhasedQResult phased_q_learn_exact(const TabularMdp& mdp, const Matrix& reward, double gamma,
                                   int ell);

/// max over (s, a, i) of |mean of V_i over slice i of bucket (s, a) - E_P V_i|.
double max_concentration_error(const TabularMdp& mdp, const ParallelSamples& samples,
                               const PhasedQResult& result);

}  // namespace ilbrl

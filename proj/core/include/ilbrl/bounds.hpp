#pragma once

#include <cstddef>
#include <cstdint>

namespace ilbrl {

/// Closed-form sample-complexity and value bounds. Logarithms are natural;
/// the explicit log 2 of the exploration bound is kept literal.

/// Pointwise |Q_l - Q*| bound of phased Q-learning: (eta' gamma + gamma^l) / (1 - gamma).
double value_gap_bound(double eta_prime, double gamma, long long ell);

/// Discounted regret bound: 2 / (1 - gamma) * value_gap_bound.
double regret_bound(double eta_prime, double gamma, long long ell);

/// Total parallel samples m * l per (s, a) needed for discounted regret
/// below eta with probability 1 - delta':
///   log(2 l S A / delta') 2 gamma^2 l / [(1 - gamma)^2 (eta (1 - gamma)^2 - 2 gamma^l)^2].
/// Throws InvalidArgument unless eta (1 - gamma)^2 > 2 gamma^l.
double min_phase_samples(double eta, double gamma, long long ell, std::size_t num_states,
                         std::size_t num_actions, double delta_prime);

/// Exploratory steps after which thinned rollouts cover every (s, a) with
/// probability 1 - delta'':
///   2 t / (log 2 p_min) * log(2 / p_min) * log(S A / delta'').
double min_explore_samples(int t_explore, double p_min, std::size_t num_states,
                           std::size_t num_actions, double delta_second);

/// Additive gap between the average reward of the discounted-optimal policy
/// and mu*: beta (1 - gamma) / (1 - gamma |lambda2|) + (1 - gamma) epsilon.
double average_gap(double epsilon, double gamma, double lambda2, double beta);

struct IntrinsicFloor {
    double floor = 0.0;       ///< 1 - nu - sqrt(8 S t / |D_E|)
    double fail_prob = 0.0;   ///< 2 exp(-nu^2 |D_E| / (4.5 t))
};

/// Lower bound on the expert's own intrinsic average reward.
IntrinsicFloor intrinsic_floor(std::uint64_t expert_count, std::size_t num_states, int t_expert,
                               double nu);

/// Lower bound on the true average reward of a policy whose intrinsic
/// average reward is 1 - eps': (1 - eps') mu_expert - 4 t eps'. May be
/// negative.
double extrinsic_floor(double eps_prime, double mu_expert, int t_expert);

/// Thinning period ceil(t_mix log(2 / p_min) / log 2), exact for powers of two.
int thinning_period(int t_mix, double p_min);

/// A bound is vacuous when it says nothing about a quantity confined to
/// [lo, hi].
inline bool is_vacuous_upper(double bound, double range) { return bound >= range; }
inline bool is_vacuous_lower(double floor) { return floor <= 0.0; }

}  // namespace ilbrl

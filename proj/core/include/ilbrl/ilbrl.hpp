#pragma once

#include "ilbrl/dataset.hpp"
#include "ilbrl/mdp.hpp"
#include "ilbrl/planner.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace ilbrl {

/// r_hat(s, a) = 1 if (s, a) occurs in the expert data, else 0.
struct IntrinsicReward {
    Matrix table;
};

/// Set-membership indicator over the (s, a) pairs of `expert`. Throws
/// ModelError on out-of-range indices.
IntrinsicReward intrinsic_reward(const TransitionDataset& expert, std::size_t num_states,
                                 std::size_t num_actions);

/// Offline RL procedure: (unified data, reward table) -> policy.
using OfflineSolver =
    std::function<DeterministicPolicy(const TransitionDataset& data, const Matrix& reward)>;

struct PhasedQSolverOptions {
    double gamma = 0.9;
    int ell = 50;
    int m = 4;
    int thinning = 1;
};

/// Phased Q-learning on buckets built from the data (m * l successors per
/// pair, every `thinning`-th record). Throws CoverageError if the data is
/// too thin.
OfflineSolver phased_q_solver(const PhasedQSolverOptions& options);

/// Solver settings from a planned budget. Throws PlanningError when l, m or
/// T do not fit an int.
PhasedQSolverOptions solver_options(const BoundParameters& params);

/// Oracle solver: value iteration on the true dynamics with the given reward
/// and discount, ignoring the data.
OfflineSolver exact_solver(const TabularMdp& mdp, double gamma, double tol = 1e-12);

struct IlbrlResult {
    DeterministicPolicy policy;
    IntrinsicReward reward;
};

/// Labels D_U = D_E + D_X with the intrinsic reward and runs `solver` once.
IlbrlResult run_ilbrl(const TransitionDataset& expert, const TransitionDataset& exploratory,
                      const OfflineSolver& solver);
IlbrlResult run_ilbrl(const TransitionDataset& expert, const TransitionDataset& exploratory,
                      const BoundParameters& params);

/// rho(s) pi(a|s) flattened as s * A + a, for an ergodic policy chain.
Vector state_action_distribution(const TabularMdp& mdp, const DeterministicPolicy& policy);

/// mu_int = sum_s rho(s) r_hat(s, pi(s)); 1 - mu_int is eps'.
double intrinsic_average_reward(const TabularMdp& mdp, const DeterministicPolicy& policy,
                                const IntrinsicReward& reward);

/// mu^{pi_E} - mu^{pi} under the true reward.
double imitation_regret(const TabularMdp& mdp, const DeterministicPolicy& expert,
                        const DeterministicPolicy& imitator);

/// TV between the state-action stationary distributions of two policies.
double stationary_tv(const TabularMdp& mdp, const DeterministicPolicy& expert,
                     const DeterministicPolicy& imitator);

struct RunRecord {
    std::uint64_t seed = 0;
    std::string config_hash;
    std::size_t expert_records = 0;
    std::size_t exploratory_records = 0;
    double mu_intrinsic = 0.0;
    double mu_expert = 0.0;
    double mu_imitator = 0.0;
    double regret = 0.0;
    double tv = 0.0;
    DeterministicPolicy expert;
    DeterministicPolicy imitator;
};

/// Evaluates a learned policy against the expert on the true MDP.
RunRecord evaluate_run(const TabularMdp& mdp, const DeterministicPolicy& expert,
                       const IlbrlResult& result);

/// JSON object with every RunRecord field.
std::string format_run_record(const RunRecord& record);

}  // namespace ilbrl

#pragma once

#include "ilbrl/dataset.hpp"
#include "ilbrl/mdp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ilbrl {

struct OpeConfig {
    double learning_rate = 0.1;
    /// Target tables move by t <- (1 - tau) t + tau theta after every batch.
    double tau = 0.1;
    /// When set, the evaluation data is resampled to this expert/exploratory mix.
    std::optional<double> expert_data_fraction;
    int passes = 50;
    /// |Q| above this marks the run diverged. Defaults to
    /// 10 max|r| / (1 - discount) over the data (10 / (1 - discount) if all rewards are 0).
    std::optional<double> divergence_threshold;
    double discount = 0.9;
    /// Step size in pass p (0-based) is learning_rate / (1 + lr_decay p).
    double lr_decay = 0.0;
    /// Records per update. Within a batch, TD errors are computed against the
    /// pre-batch tables and summed.
    int batch_size = 1;
    /// A pass whose sup-norm change of the mean table is below this counts as converged.
    double convergence_tol = 1e-4;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

struct OpeResult {
    ValueTable value;  ///< mean of the two estimators
    bool diverged = false;
    std::uint64_t seed = 0;
    /// First pass (1-based) after which every later pass changed the table by
    /// less than convergence_tol; passes + 1 if that never happened.
    int converged_pass = 0;
};

/// Tabular Expected SARSA with two estimators, each sweeping its own seeded
/// permutation of `data` every pass, bootstrapping on the averaged target
/// tables r + discount * (T1(s', pi(s')) + T2(s', pi(s'))) / 2 (just r on
/// terminal records).
OpeResult esarsa_evaluate(const TransitionDataset& data, const DeterministicPolicy& policy,
                          const OpeConfig& config, std::uint64_t seed);

/// Mean of Q(s, pi(s)) over the records of `held_out`.
double initial_state_value(const ValueTable& value, const DeterministicPolicy& policy,
                           const TransitionDataset& held_out);

/// Mean exact discounted value V^pi(s) over the records of `held_out`.
double true_initial_value(const TabularMdp& mdp, const DeterministicPolicy& policy,
                          const TransitionDataset& held_out, double discount);

/// Monte-Carlo version of true_initial_value: `episodes` rollouts of
/// `horizon` steps from each held-out start state.
double sampled_initial_value(const TabularMdp& mdp, const DeterministicPolicy& policy,
                             const TransitionDataset& held_out, double discount, int episodes,
                             int horizon, std::uint64_t seed);

struct PolicyEstimate {
    double value = 0.0;
    bool diverged = false;
};

struct RankErrorResult {
    int error = 0;
    /// Sum of |learned - true| over non-diverged entries.
    double distance = 0.0;
};

/// sum_k |rank(learned_k) - rank(true_k)| with rank 1 = highest value and
/// ties going to the lower index. A diverged entry contributes K; the other
/// entries keep their learned order and receive the ranks that minimise the
/// total. Throws InvalidArgument if K < 2 or the lengths differ.
RankErrorResult rank_error(std::span<const PolicyEstimate> learned, std::span<const double> truths);

struct KnownPolicy {
    DeterministicPolicy policy;
    double true_value = 0.0;
};

struct ConfigScore {
    RankErrorResult rank;
    std::vector<PolicyEstimate> estimates;
    int max_converged_pass = 0;
    bool all_diverged = false;
};

struct TuneResult {
    std::size_t best = 0;
    /// grid[best] with passes fixed to its slowest observed convergence.
    OpeConfig config;
    std::vector<ConfigScore> scores;
};

/// Evaluates every known policy under every config (values averaged over the
/// non-diverged eval seeds) and returns the config with the lowest RankError,
/// then lowest distance, then lowest index. Throws Error if every config
/// diverges on every policy.
TuneResult tune_ope(const TransitionDataset& d_pe, const TransitionDataset& d_f,
                    std::span<const KnownPolicy> known, std::span<const OpeConfig> grid,
                    std::span<const std::uint64_t> eval_seeds, std::size_t workers = 1);

struct CellScore {
    std::size_t hyperparam = 0;
    std::size_t policy_index = 0;
    std::uint64_t eval_seed = 0;
    double value = 0.0;
    bool diverged = false;
};

struct SelectionResult {
    std::size_t best = 0;
    /// Mean value per hyperparameter over convergent cells; nullopt if none.
    std::vector<std::optional<double>> scores;
    std::vector<CellScore> cells;
};

/// candidates[n][s] is the policy trained with hyperparameter n and seed s.
/// Returns the hyperparameter with the highest mean held-out value among
/// convergent evaluations. Throws Error if no evaluation converges.
SelectionResult select_policy(const std::vector<std::vector<DeterministicPolicy>>& candidates,
                              const TransitionDataset& d_pe, const TransitionDataset& d_f,
                              const OpeConfig& config, std::span<const std::uint64_t> eval_seeds,
                              std::size_t workers = 1);

/// Trains one candidate on D_T.
using TrainFn = std::function<DeterministicPolicy(const TransitionDataset& train,
                                                  std::size_t hyperparam, std::uint64_t seed)>;

struct ProtocolOptions {
    double train_fraction = 0.5;
    double ope_fraction = 0.5;
    std::vector<OpeConfig> grid;
    std::vector<std::uint64_t> eval_seeds{0, 1};
    std::size_t hyperparams = 1;
    std::vector<std::uint64_t> policy_seeds{0};
    std::size_t workers = 1;
};

struct ProtocolResult {
    DatasetSplit split;
    TuneResult tuning;
    std::vector<std::vector<DeterministicPolicy>> candidates;
    SelectionResult selection;
};

/// True value of a known policy on the final validation states.
using TruthFn =
    std::function<double(const DeterministicPolicy& policy, const TransitionDataset& d_f)>;

/// Fully offline tuning: split, tune OPE on the known policies, train every
/// (hyperparam, seed) candidate on D_T, select on D_V.
ProtocolResult run_protocol(const TransitionDataset& data,
                            std::span<const DeterministicPolicy> known, const TruthFn& truth,
                            const TrainFn& train, const ProtocolOptions& options);

}  // namespace ilbrl

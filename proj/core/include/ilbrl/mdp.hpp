#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ilbrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite discounted MDP with a deterministic reward in [0, 1].
///
/// Transitions are stored flat in (s, a, s') row-major order, so
/// transition(s, a) is a contiguous probability vector over next states.
/// Every instance satisfies its invariants: construction throws ModelError
/// otherwise.
class TabularMdp {
public:
    static constexpr double kProbabilityTolerance = 1e-12;

    TabularMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transitions,
               Matrix rewards, Vector initial, double discount);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double discount() const noexcept { return discount_; }

    std::span<const double> transition(std::size_t s, std::size_t a) const {
        return {transitions_.data() + (s * num_actions_ + a) * num_states_, num_states_};
    }
    double probability(std::size_t s, std::size_t a, std::size_t next) const {
        return transitions_[(s * num_actions_ + a) * num_states_ + next];
    }
    const std::vector<double>& transitions() const noexcept { return transitions_; }

    double reward(std::size_t s, std::size_t a) const { return rewards_(s, a); }
    const Matrix& rewards() const noexcept { return rewards_; }
    const Vector& initial() const noexcept { return initial_; }

    /// Same dynamics with a different reward table (e.g. the intrinsic reward).
    TabularMdp with_rewards(Matrix rewards) const;
    TabularMdp with_discount(double discount) const;

    /// Exact (bitwise-value) equality of every field.
    bool operator==(const TabularMdp& other) const;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> transitions_;
    Matrix rewards_;
    Vector initial_;
    double discount_;
};

class DeterministicPolicy {
public:
    DeterministicPolicy() = default;
    explicit DeterministicPolicy(std::vector<int> actions) : actions_(std::move(actions)) {}

    /// Every state takes action `a`.
    static DeterministicPolicy constant(std::size_t num_states, int a) {
        return DeterministicPolicy(std::vector<int>(num_states, a));
    }

    int operator()(std::size_t s) const { return actions_[s]; }
    std::size_t size() const noexcept { return actions_.size(); }
    const std::vector<int>& actions() const noexcept { return actions_; }

    /// Throws ModelError unless the policy is defined on every state of the
    /// MDP and every action index is in range.
    void validate(std::size_t num_states, std::size_t num_actions) const;

    bool operator==(const DeterministicPolicy&) const = default;

private:
    std::vector<int> actions_;
};

class StochasticPolicy {
public:
    StochasticPolicy() = default;
    /// Rows are per-state action distributions; throws ModelError if a row
    /// is negative or does not sum to one.
    explicit StochasticPolicy(Matrix probs);

    static StochasticPolicy uniform(std::size_t num_states, std::size_t num_actions);
    static StochasticPolicy from_deterministic(const DeterministicPolicy& policy,
                                               std::size_t num_actions);

    double operator()(std::size_t s, std::size_t a) const { return probs_(s, a); }
    const Matrix& probs() const noexcept { return probs_; }
    std::size_t num_states() const noexcept { return static_cast<std::size_t>(probs_.rows()); }
    std::size_t num_actions() const noexcept { return static_cast<std::size_t>(probs_.cols()); }

    /// Per-state most probable action, lowest index on ties.
    DeterministicPolicy argmax() const;

private:
    Matrix probs_;
};

/// Action values Q(s, a); state values are derived on demand.
struct ValueTable {
    Matrix q;

    /// V(s) = max_a Q(s, a).
    Vector max_values() const { return q.rowwise().maxCoeff(); }
    /// V(s) = Q(s, policy(s)).
    Vector values(const DeterministicPolicy& policy) const;
};

/// Per-state argmax of q, ties broken by the lowest action index.
DeterministicPolicy greedy_policy(const ValueTable& values);

/// Stationary distribution and derived chain statistics for one policy.
struct ChainAnalysis {
    Vector stationary;          ///< rho over states
    Vector state_action;        ///< rho(s) * pi(a|s), flattened s * A + a
    int mixing_time = 0;
    double lambda2 = 0.0;       ///< |second largest eigenvalue|
    double kappa = 1.0;         ///< condition number of the eigenvector matrix
    double reward_norm = 0.0;   ///< Euclidean norm of r(s, pi(s))
    double beta = 0.0;          ///< kappa * reward_norm
    double p_min = 0.0;         ///< min state-action mass over the policy's support
};

// Markov chain induced by a policy: P_pi(s, s') = sum_a pi(a|s) P(s, a, s').
Matrix chain_matrix(const TabularMdp& mdp, const DeterministicPolicy& policy);
Matrix chain_matrix(const TabularMdp& mdp, const StochasticPolicy& policy);

// Expected one-step reward r_pi(s).
Vector policy_rewards(const TabularMdp& mdp, const DeterministicPolicy& policy);
Vector policy_rewards(const TabularMdp& mdp, const StochasticPolicy& policy);

/// (sum_s' P(s, a, s') V(s'))_{s,a} as an S x A table.
Matrix expected_next_values(const TabularMdp& mdp, const Vector& values);

/// Value iteration on the Bellman optimality operator.
///
/// Stops once the sup-norm change between successive iterates is at most
/// tol and returns the last iterate. Throws ConvergenceError carrying the
/// residual when max_iters is exhausted, InvalidArgument if tol <= 0.
ValueTable value_iteration(const TabularMdp& mdp, double tol, int max_iters);

/// `iterations` exact Bellman optimality backups starting from Q = 0.
ValueTable value_iteration_steps(const TabularMdp& mdp, const Matrix& rewards, int iterations);

/// Exact discounted value of a fixed policy: solves V = r_pi + gamma P_pi V
/// and returns Q(s, a) = r(s, a) + gamma sum_s' P(s, a, s') V(s').
ValueTable policy_value_discounted(const TabularMdp& mdp, const DeterministicPolicy& policy);
ValueTable policy_value_discounted(const TabularMdp& mdp, const StochasticPolicy& policy);

/// Long-run average reward mu_pi = sum_s rho(s) r_pi(s). Throws
/// ErgodicityError when the induced chain is not irreducible and aperiodic.
double average_reward(const TabularMdp& mdp, const DeterministicPolicy& policy);
double average_reward(const TabularMdp& mdp, const StochasticPolicy& policy);

/// Throws ErgodicityError if `chain` is reducible or periodic. The test is
/// structural (on the support graph), so it is exact.
void check_ergodic(const Matrix& chain);

/// Stationary distribution of an ergodic chain.
///
/// Solved directly from (I - P^T) rho = 0 with the normalisation row; chains
/// with more than kPowerIterationThreshold states use power iteration.
Vector steady_state(const Matrix& chain);
inline constexpr long kPowerIterationThreshold = 2000;

/// Smallest t with max_s TV(e_s^T P^t, rho) <= 1/4, by exact matrix powers.
/// Throws ConvergenceError (residual = last distance) if t would exceed cap.
int mixing_time(const Matrix& chain, const Vector& stationary, int cap = 100000);

/// Worst-start TV distance to `stationary` after exactly t steps.
double worst_case_distance(const Matrix& chain, const Vector& stationary, int t);

/// Half the L1 distance. Throws InvalidArgument on length mismatch.
double tv_distance(const Vector& p, const Vector& q);

/// Modulus of the second-largest eigenvalue (0 for a single state).
double second_eigenvalue_modulus(const Matrix& chain);

/// kappa(Sigma) = ||Sigma||_2 ||Sigma^-1||_2 for the right eigenvectors of
/// `chain`. Throws AssumptionError if two eigenvalues are within 1e-8.
double eigenvector_condition_number(const Matrix& chain);
inline constexpr double kEigenvalueGap = 1e-8;

ChainAnalysis chain_analysis(const TabularMdp& mdp, const DeterministicPolicy& policy,
                             int mixing_cap = 100000);
ChainAnalysis chain_analysis(const TabularMdp& mdp, const StochasticPolicy& policy,
                             int mixing_cap = 100000);

}  // namespace ilbrl

#include "ilbrl/mdp.hpp"

#include "ilbrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <queue>
#include <string>

namespace ilbrl {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_probability_vector(const double* p, std::size_t n, double tol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p[i] >= 0.0) || !std::isfinite(p[i])) return false;
        sum += p[i];
    }
    return std::abs(sum - 1.0) <= tol;
}

void check_square_stochastic(const Matrix& chain) {
    if (chain.rows() == 0 || chain.rows() != chain.cols())
        throw InvalidArgument("chain must be a non-empty square matrix");
    for (Eigen::Index i = 0; i < chain.rows(); ++i) {
        const RowMajorMatrix row = chain.row(i);
        if (!is_probability_vector(row.data(), static_cast<std::size_t>(row.size()), 1e-9))
            throw InvalidArgument("chain row " + std::to_string(i) + " is not a probability vector");
    }
}

// Forward reachability from `start` on the support graph of the chain.
std::vector<int> bfs_levels(const Matrix& chain, bool transpose) {
    const auto n = chain.rows();
    std::vector<int> level(static_cast<std::size_t>(n), -1);
    std::queue<Eigen::Index> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (Eigen::Index v = 0; v < n; ++v) {
            const double w = transpose ? chain(v, u) : chain(u, v);
            if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
                level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                frontier.push(v);
            }
        }
    }
    return level;
}

}  // namespace

TabularMdp::TabularMdp(std::size_t num_states, std::size_t num_actions,
                       std::vector<double> transitions, Matrix rewards, Vector initial,
                       double discount)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      initial_(std::move(initial)),
      discount_(discount) {
    if (num_states_ == 0 || num_actions_ == 0)
        throw ModelError("MDP needs at least one state and one action");
    if (transitions_.size() != num_states_ * num_actions_ * num_states_)
        throw ModelError("transition tensor has " + std::to_string(transitions_.size()) +
                         " entries, expected S*A*S = " +
                         std::to_string(num_states_ * num_actions_ * num_states_));
    for (std::size_t s = 0; s < num_states_; ++s)
        for (std::size_t a = 0; a < num_actions_; ++a)
            if (!is_probability_vector(transition(s, a).data(), num_states_, kProbabilityTolerance))
                throw ModelError("P(" + std::to_string(s) + ", " + std::to_string(a) +
                                 ", .) is not a probability vector");
    if (rewards_.rows() != static_cast<Eigen::Index>(num_states_) ||
        rewards_.cols() != static_cast<Eigen::Index>(num_actions_))
        throw ModelError("reward table must be S x A");
    for (Eigen::Index i = 0; i < rewards_.size(); ++i) {
        const double r = rewards_.data()[i];
        if (!(r >= 0.0 && r <= 1.0)) throw ModelError("rewards must lie in [0, 1]");
    }
    if (initial_.size() != static_cast<Eigen::Index>(num_states_) ||
        !is_probability_vector(initial_.data(), num_states_, kProbabilityTolerance))
        throw ModelError("initial distribution must be a probability vector over states");
    if (!(discount_ >= 0.0 && discount_ < 1.0)) throw ModelError("discount must lie in [0, 1)");
}

TabularMdp TabularMdp::with_rewards(Matrix rewards) const {
    return TabularMdp(num_states_, num_actions_, transitions_, std::move(rewards), initial_,
                      discount_);
}

TabularMdp TabularMdp::with_discount(double discount) const {
    return TabularMdp(num_states_, num_actions_, transitions_, rewards_, initial_, discount);
}

bool TabularMdp::operator==(const TabularMdp& other) const {
    return num_states_ == other.num_states_ && num_actions_ == other.num_actions_ &&
           discount_ == other.discount_ && transitions_ == other.transitions_ &&
           rewards_ == other.rewards_ && initial_ == other.initial_;
}

void DeterministicPolicy::validate(std::size_t num_states, std::size_t num_actions) const {
    if (actions_.size() != num_states)
        throw ModelError("policy covers " + std::to_string(actions_.size()) + " states, MDP has " +
                         std::to_string(num_states));
    for (std::size_t s = 0; s < actions_.size(); ++s)
        if (actions_[s] < 0 || static_cast<std::size_t>(actions_[s]) >= num_actions)
            throw ModelError("policy action out of range at state " + std::to_string(s));
}

StochasticPolicy::StochasticPolicy(Matrix probs) : probs_(std::move(probs)) {
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        const RowMajorMatrix row = probs_.row(s);
        if (!is_probability_vector(row.data(), static_cast<std::size_t>(row.size()),
                                   TabularMdp::kProbabilityTolerance))
            throw ModelError("policy row " + std::to_string(s) + " is not a distribution");
    }
}

StochasticPolicy StochasticPolicy::uniform(std::size_t num_states, std::size_t num_actions) {
    return StochasticPolicy(Matrix::Constant(static_cast<Eigen::Index>(num_states),
                                             static_cast<Eigen::Index>(num_actions),
                                             1.0 / static_cast<double>(num_actions)));
}

StochasticPolicy StochasticPolicy::from_deterministic(const DeterministicPolicy& policy,
                                                      std::size_t num_actions) {
    Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(policy.size()),
                                static_cast<Eigen::Index>(num_actions));
    for (std::size_t s = 0; s < policy.size(); ++s) probs(static_cast<Eigen::Index>(s), policy(s)) = 1.0;
    return StochasticPolicy(std::move(probs));
}

DeterministicPolicy StochasticPolicy::argmax() const {
    return greedy_policy(ValueTable{probs_});
}

Vector ValueTable::values(const DeterministicPolicy& policy) const {
    Vector v(q.rows());
    for (Eigen::Index s = 0; s < q.rows(); ++s) v(s) = q(s, policy(static_cast<std::size_t>(s)));
    return v;
}

DeterministicPolicy greedy_policy(const ValueTable& values) {
    std::vector<int> actions(static_cast<std::size_t>(values.q.rows()));
    for (Eigen::Index s = 0; s < values.q.rows(); ++s) {
        Eigen::Index best = 0;
        for (Eigen::Index a = 1; a < values.q.cols(); ++a)
            if (values.q(s, a) > values.q(s, best)) best = a;
        actions[static_cast<std::size_t>(s)] = static_cast<int>(best);
    }
    return DeterministicPolicy(std::move(actions));
}

Matrix chain_matrix(const TabularMdp& mdp, const DeterministicPolicy& policy) {
    policy.validate(mdp.num_states(), mdp.num_actions());
    const auto n = static_cast<Eigen::Index>(mdp.num_states());
    Matrix chain(n, n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto row = mdp.transition(static_cast<std::size_t>(s), static_cast<std::size_t>(policy(s)));
        for (Eigen::Index t = 0; t < n; ++t) chain(s, t) = row[static_cast<std::size_t>(t)];
    }
    return chain;
}

Matrix chain_matrix(const TabularMdp& mdp, const StochasticPolicy& policy) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw ModelError("stochastic policy dimensions do not match the MDP");
    const auto n = static_cast<Eigen::Index>(mdp.num_states());
    Matrix chain = Matrix::Zero(n, n);
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            const double w = policy(s, a);
            if (w == 0.0) continue;
            const auto row = mdp.transition(s, a);
            for (std::size_t t = 0; t < mdp.num_states(); ++t)
                chain(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) += w * row[t];
        }
    return chain;
}

Vector policy_rewards(const TabularMdp& mdp, const DeterministicPolicy& policy) {
    policy.validate(mdp.num_states(), mdp.num_actions());
    Vector r(static_cast<Eigen::Index>(mdp.num_states()));
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        r(static_cast<Eigen::Index>(s)) = mdp.reward(s, static_cast<std::size_t>(policy(s)));
    return r;
}

Vector policy_rewards(const TabularMdp& mdp, const StochasticPolicy& policy) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw ModelError("stochastic policy dimensions do not match the MDP");
    return policy.probs().cwiseProduct(mdp.rewards()).rowwise().sum();
}

Matrix expected_next_values(const TabularMdp& mdp, const Vector& values) {
    const auto S = static_cast<Eigen::Index>(mdp.num_states());
    const auto A = static_cast<Eigen::Index>(mdp.num_actions());
    Eigen::Map<const RowMajorMatrix> p(mdp.transitions().data(), S * A, S);
    const Vector flat = p * values;
    Matrix out(S, A);
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) out(s, a) = flat(s * A + a);
    return out;
}

ValueTable value_iteration(const TabularMdp& mdp, double tol, int max_iters) {
    if (!(tol > 0.0)) throw InvalidArgument("value_iteration: tol must be positive");
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(mdp.num_states()),
                            static_cast<Eigen::Index>(mdp.num_actions()));
    double residual = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Matrix next = mdp.rewards() + mdp.discount() * expected_next_values(mdp, q.rowwise().maxCoeff());
        residual = (next - q).cwiseAbs().maxCoeff();
        q = std::move(next);
        if (residual <= tol) return ValueTable{std::move(q)};
    }
    throw ConvergenceError("value_iteration did not converge in " + std::to_string(max_iters) +
                               " iterations",
                           residual);
}

ValueTable value_iteration_steps(const TabularMdp& mdp, const Matrix& rewards, int iterations) {
    Matrix q = Matrix::Zero(rewards.rows(), rewards.cols());
    for (int it = 0; it < iterations; ++it)
        q = rewards + mdp.discount() * expected_next_values(mdp, q.rowwise().maxCoeff());
    return ValueTable{std::move(q)};
}

namespace {

ValueTable solve_policy_value(const TabularMdp& mdp, const Matrix& chain, const Vector& r_pi) {
    const auto n = chain.rows();
    const Matrix system = Matrix::Identity(n, n) - mdp.discount() * chain;
    const Vector v = system.partialPivLu().solve(r_pi);
    const double residual = (system * v - r_pi).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-10)
        throw Error("policy evaluation: linear solve residual " + std::to_string(residual));
    return ValueTable{mdp.rewards() + mdp.discount() * expected_next_values(mdp, v)};
}

}  // namespace

ValueTable policy_value_discounted(const TabularMdp& mdp, const DeterministicPolicy& policy) {
    return solve_policy_value(mdp, chain_matrix(mdp, policy), policy_rewards(mdp, policy));
}

ValueTable policy_value_discounted(const TabularMdp& mdp, const StochasticPolicy& policy) {
    return solve_policy_value(mdp, chain_matrix(mdp, policy), policy_rewards(mdp, policy));
}

double average_reward(const TabularMdp& mdp, const DeterministicPolicy& policy) {
    return steady_state(chain_matrix(mdp, policy)).dot(policy_rewards(mdp, policy));
}

double average_reward(const TabularMdp& mdp, const StochasticPolicy& policy) {
    return steady_state(chain_matrix(mdp, policy)).dot(policy_rewards(mdp, policy));
}

void check_ergodic(const Matrix& chain) {
    check_square_stochastic(chain);
    const auto forward = bfs_levels(chain, false);
    const auto backward = bfs_levels(chain, true);
    for (std::size_t i = 0; i < forward.size(); ++i)
        if (forward[i] < 0 || backward[i] < 0)
            throw ErgodicityError("policy-induced chain is reducible (state " + std::to_string(i) +
                                  " does not communicate with state 0)");
    // The period is the gcd of level[u] + 1 - level[v] over all support edges.
    int period = 0;
    const auto n = chain.rows();
    for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v)
            if (chain(u, v) > 0.0)
                period = std::gcd(period, std::abs(forward[static_cast<std::size_t>(u)] + 1 -
                                                   forward[static_cast<std::size_t>(v)]));
    if (period != 1)
        throw ErgodicityError("policy-induced chain is periodic with period " +
                              std::to_string(period));
}

Vector steady_state(const Matrix& chain) {
    check_ergodic(chain);
    const auto n = chain.rows();
    Vector rho;
    if (n <= kPowerIterationThreshold) {
        Matrix system = Matrix::Identity(n, n) - chain.transpose();
        system.row(n - 1).setOnes();
        Vector rhs = Vector::Zero(n);
        rhs(n - 1) = 1.0;
        rho = system.fullPivLu().solve(rhs);
    } else {
        rho = Vector::Constant(n, 1.0 / static_cast<double>(n));
        for (int it = 0; it < 1000000; ++it) {
            Vector next = chain.transpose() * rho;
            next /= next.sum();
            const double change = (next - rho).cwiseAbs().sum();
            rho = std::move(next);
            if (change < 1e-15) break;
        }
    }
    if (!(rho.minCoeff() > 0.0))
        throw ErgodicityError("stationary distribution has zero mass on some state");
    const double residual = (chain.transpose() * rho - rho).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        throw ErgodicityError("stationary solve did not converge (residual " +
                              std::to_string(residual) + ")");
    return rho;
}

double tv_distance(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw InvalidArgument("tv_distance: length mismatch");
    return 0.5 * (p - q).cwiseAbs().sum();
}

double worst_case_distance(const Matrix& chain, const Vector& stationary, int t) {
    Matrix power = Matrix::Identity(chain.rows(), chain.cols());
    for (int i = 0; i < t; ++i) power = power * chain;
    double worst = 0.0;
    for (Eigen::Index s = 0; s < power.rows(); ++s)
        worst = std::max(worst, tv_distance(power.row(s).transpose(), stationary));
    return worst;
}

int mixing_time(const Matrix& chain, const Vector& stationary, int cap) {
    check_square_stochastic(chain);
    if (stationary.size() != chain.rows()) throw InvalidArgument("mixing_time: length mismatch");
    // Slack absorbs rounding in the matrix powers at an exact 1/4 boundary.
    constexpr double kThreshold = 0.25 + 1e-12;
    Matrix power = chain;
    double distance = 1.0;
    for (int t = 1; t <= cap; ++t) {
        distance = 0.0;
        for (Eigen::Index s = 0; s < power.rows(); ++s)
            distance = std::max(distance, tv_distance(power.row(s).transpose(), stationary));
        if (distance <= kThreshold) return t;
        power = power * chain;
    }
    throw ConvergenceError("mixing time exceeds cap " + std::to_string(cap), distance);
}

double second_eigenvalue_modulus(const Matrix& chain) {
    if (chain.rows() <= 1) return 0.0;
    Eigen::EigenSolver<Matrix> solver(chain, false);
    if (solver.info() != Eigen::Success) throw Error("eigen-decomposition failed");
    std::vector<double> moduli;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        moduli.push_back(std::abs(solver.eigenvalues()(i)));
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    return std::min(1.0, moduli[1]);
}

double eigenvector_condition_number(const Matrix& chain) {
    if (chain.rows() <= 1) return 1.0;
    Eigen::EigenSolver<Matrix> solver(chain, true);
    if (solver.info() != Eigen::Success) throw Error("eigen-decomposition failed");
    const auto& lambda = solver.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        for (Eigen::Index j = i + 1; j < lambda.size(); ++j)
            if (std::abs(lambda(i) - lambda(j)) < kEigenvalueGap)
                throw AssumptionError("transition matrix has repeated eigenvalues; the "
                                      "eigenvector condition number is undefined");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(solver.eigenvectors());
    const auto& sigma = svd.singularValues();
    return sigma(0) / sigma(sigma.size() - 1);
}

namespace {

template <typename Policy>
ChainAnalysis analyse(const TabularMdp& mdp, const Policy& policy, const Matrix& probs,
                      int mixing_cap) {
    ChainAnalysis out;
    const Matrix chain = chain_matrix(mdp, policy);
    out.stationary = steady_state(chain);
    out.mixing_time = mixing_time(chain, out.stationary, mixing_cap);
    out.lambda2 = second_eigenvalue_modulus(chain);
    out.kappa = eigenvector_condition_number(chain);
    out.reward_norm = policy_rewards(mdp, policy).norm();
    out.beta = out.kappa * out.reward_norm;
    const auto S = static_cast<Eigen::Index>(mdp.num_states());
    const auto A = static_cast<Eigen::Index>(mdp.num_actions());
    out.state_action = Vector::Zero(S * A);
    out.p_min = 1.0;
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) {
            const double mass = out.stationary(s) * probs(s, a);
            out.state_action(s * A + a) = mass;
            if (probs(s, a) > 0.0) out.p_min = std::min(out.p_min, mass);
        }
    return out;
}

}  // namespace

ChainAnalysis chain_analysis(const TabularMdp& mdp, const DeterministicPolicy& policy,
                             int mixing_cap) {
    policy.validate(mdp.num_states(), mdp.num_actions());
    const auto probs = StochasticPolicy::from_deterministic(policy, mdp.num_actions());
    return analyse(mdp, policy, probs.probs(), mixing_cap);
}

ChainAnalysis chain_analysis(const TabularMdp& mdp, const StochasticPolicy& policy,
                             int mixing_cap) {
    return analyse(mdp, policy, policy.probs(), mixing_cap);
}

}  // namespace ilbrl

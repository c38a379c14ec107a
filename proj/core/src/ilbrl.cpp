#include "ilbrl/ilbrl.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/phased_q.hpp"
#include "ilbrl/sampler.hpp"

#include <json.hpp>

#include <limits>

namespace ilbrl {

IntrinsicReward intrinsic_reward(const TransitionDataset& expert, std::size_t num_states,
                                 std::size_t num_actions) {
    IntrinsicReward out{Matrix::Zero(static_cast<Eigen::Index>(num_states),
                                     static_cast<Eigen::Index>(num_actions))};
    for (const auto& r : expert.records) {
        if (r.state < 0 || static_cast<std::size_t>(r.state) >= num_states || r.action < 0 ||
            static_cast<std::size_t>(r.action) >= num_actions)
            throw ModelError("expert record (" + std::to_string(r.state) + ", " +
                             std::to_string(r.action) + ") is outside the MDP");
        out.table(r.state, r.action) = 1.0;
    }
    return out;
}

OfflineSolver phased_q_solver(const PhasedQSolverOptions& options) {
    if (options.ell < 1 || options.m < 1 || options.thinning < 1)
        throw InvalidArgument("phased Q-learning solver needs positive l, m and thinning");
    if (static_cast<long long>(options.ell) * options.m > std::numeric_limits<int>::max())
        throw InvalidArgument("m * l does not fit an int");
    return [options](const TransitionDataset& data, const Matrix& reward) {
        const auto samples = buckets_from_dataset(data, options.ell * options.m, options.thinning);
        return phased_q_learn(samples, reward, options.gamma, options.ell).policy;
    };
}

PhasedQSolverOptions solver_options(const BoundParameters& params) {
    constexpr auto kIntMax = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
    if (params.ell > kIntMax || params.m > kIntMax || params.T > kIntMax ||
        params.ell * params.m > kIntMax)
        throw PlanningError("planned l, m or T is too large to run");
    return {params.gamma, static_cast<int>(params.ell), static_cast<int>(params.m),
            static_cast<int>(params.T)};
}

OfflineSolver exact_solver(const TabularMdp& mdp, double gamma, double tol) {
    return [mdp, gamma, tol](const TransitionDataset&, const Matrix& reward) {
        const auto model = mdp.with_rewards(reward).with_discount(gamma);
        return greedy_policy(value_iteration(model, tol, 1000000));
    };
}

IlbrlResult run_ilbrl(const TransitionDataset& expert, const TransitionDataset& exploratory,
                      const OfflineSolver& solver) {
    const TransitionDataset unified = merge(expert, exploratory);
    IlbrlResult out;
    out.reward = intrinsic_reward(expert, unified.num_states, unified.num_actions);
    out.policy = solver(unified, out.reward.table);
    return out;
}

IlbrlResult run_ilbrl(const TransitionDataset& expert, const TransitionDataset& exploratory,
                      const BoundParameters& params) {
    return run_ilbrl(expert, exploratory, phased_q_solver(solver_options(params)));
}

Vector state_action_distribution(const TabularMdp& mdp, const DeterministicPolicy& policy) {
    policy.validate(mdp.num_states(), mdp.num_actions());
    const Vector rho = steady_state(chain_matrix(mdp, policy));
    Vector out = Vector::Zero(static_cast<Eigen::Index>(mdp.num_states() * mdp.num_actions()));
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        out(static_cast<Eigen::Index>(s * mdp.num_actions()) + policy(s)) =
            rho(static_cast<Eigen::Index>(s));
    return out;
}

double intrinsic_average_reward(const TabularMdp& mdp, const DeterministicPolicy& policy,
                                const IntrinsicReward& reward) {
    if (static_cast<std::size_t>(reward.table.rows()) != mdp.num_states() ||
        static_cast<std::size_t>(reward.table.cols()) != mdp.num_actions())
        throw InvalidArgument("intrinsic reward dimensions do not match the MDP");
    return average_reward(mdp.with_rewards(reward.table), policy);
}

double imitation_regret(const TabularMdp& mdp, const DeterministicPolicy& expert,
                        const DeterministicPolicy& imitator) {
    return average_reward(mdp, expert) - average_reward(mdp, imitator);
}

double stationary_tv(const TabularMdp& mdp, const DeterministicPolicy& expert,
                     const DeterministicPolicy& imitator) {
    return tv_distance(state_action_distribution(mdp, expert),
                       state_action_distribution(mdp, imitator));
}

RunRecord evaluate_run(const TabularMdp& mdp, const DeterministicPolicy& expert,
                       const IlbrlResult& result) {
    RunRecord r;
    r.mu_intrinsic = intrinsic_average_reward(mdp, result.policy, result.reward);
    r.mu_expert = average_reward(mdp, expert);
    r.mu_imitator = average_reward(mdp, result.policy);
    r.regret = r.mu_expert - r.mu_imitator;
    r.tv = stationary_tv(mdp, expert, result.policy);
    r.expert = expert;
    r.imitator = result.policy;
    return r;
}

std::string format_run_record(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["expert_records"] = r.expert_records;
    j["exploratory_records"] = r.exploratory_records;
    j["mu_intrinsic"] = r.mu_intrinsic;
    j["eps_prime"] = 1.0 - r.mu_intrinsic;
    j["mu_expert"] = r.mu_expert;
    j["mu_imitator"] = r.mu_imitator;
    j["regret"] = r.regret;
    j["tv"] = r.tv;
    j["expert_policy"] = r.expert.actions();
    j["imitator_policy"] = r.imitator.actions();
    return j.dump(2) + "\n";
}

}  // namespace ilbrl

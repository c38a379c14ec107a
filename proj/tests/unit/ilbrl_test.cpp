#include "fixtures.hpp"
#include "oracles.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/ilbrl.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace ilbrl;

namespace {

TransitionDataset records(std::size_t S, std::size_t A, std::vector<std::pair<int, int>> pairs) {
    TransitionDataset d{S, A, Source::Expert, {}};
    int k = 0;
    for (auto [s, a] : pairs) {
        TransitionRecord r;
        r.episode = k++;
        r.state = s;
        r.action = a;
        r.next_state = s;
        r.source = Source::Expert;
        d.records.push_back(r);
    }
    return d;
}

// Deterministic 4-state ring: action 0 advances, action 1 stays. The expert
// always advances.
TabularMdp ring() {
    // Lazy ring: action 0 advances with probability 0.9, so the chain is aperiodic.
    return fixtures::make_mdp({{{0.1, 0.9, 0, 0}, {1, 0, 0, 0}},
                               {{0, 0.1, 0.9, 0}, {0, 1, 0, 0}},
                               {{0, 0, 0.1, 0.9}, {0, 0, 1, 0}},
                               {{0.9, 0, 0, 0.1}, {0, 0, 0, 1}}},
                              {{0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}}, 0.9);
}

}  // namespace

TEST(IntrinsicReward, IndicatorOfExpertPairs) {
    const auto r = intrinsic_reward(records(3, 2, {{0, 1}, {2, 0}, {0, 1}}), 3, 2);
    Matrix expected = Matrix::Zero(3, 2);
    expected(0, 1) = 1.0;
    expected(2, 0) = 1.0;
    EXPECT_EQ(r.table, expected);
    EXPECT_EQ(intrinsic_reward(TransitionDataset{3, 2, Source::Expert, {}}, 3, 2).table, Matrix::Zero(3, 2));
    EXPECT_THROW(intrinsic_reward(records(3, 2, {{3, 0}}), 3, 2), ModelError);
}

TEST(IntrinsicAverageReward, Examples) {
    const auto mdp = fixtures::random_mdp(3, 3, 2, 0.9);
    const auto p = DeterministicPolicy({0, 1, 0});
    EXPECT_NEAR(intrinsic_average_reward(mdp, p, intrinsic_reward(records(3, 2, {{0, 0}, {1, 1}, {2, 0}}), 3, 2)),
                1.0, 1e-12);
    EXPECT_NEAR(intrinsic_average_reward(mdp, p, intrinsic_reward(records(3, 2, {{0, 1}, {1, 0}}), 3, 2)), 0.0,
                1e-15);
    // Two-state chain with rho = (0.7, 0.3); only state 0's pair is labelled.
    const auto chain = fixtures::chain_mdp({{0.7, 0.3}, {0.7, 0.3}}, {0.0, 0.0}, 0.9);
    EXPECT_NEAR(intrinsic_average_reward(chain, DeterministicPolicy({0, 0}),
                                         intrinsic_reward(records(2, 1, {{0, 0}}), 2, 1)),
                0.7, 1e-12);
}

TEST(ImitationRegret, Examples) {
    const auto mdp = fixtures::random_mdp(4, 4, 2, 0.9);
    const auto p = DeterministicPolicy({0, 1, 1, 0});
    EXPECT_EQ(imitation_regret(mdp, p, p), 0.0);
    EXPECT_EQ(stationary_tv(mdp, p, p), 0.0);

    const auto two = fixtures::make_mdp({{{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}},
                                        {{1.0, 0.0}, {0.8, 0.1}}, 0.9);
    const auto best = DeterministicPolicy({0, 0});
    const auto worst = DeterministicPolicy({1, 1});
    EXPECT_NEAR(imitation_regret(two, best, worst), 0.9 - 0.05, 1e-12);
}

TEST(RunIlbrl, EmptyExpertDataGivesTheTieRulePolicy) {
    const auto mdp = fixtures::random_mdp(5, 4, 3, 0.9);
    const auto dx = rollout(mdp, StochasticPolicy::uniform(4, 3), 20000, 1);
    const auto res = run_ilbrl(TransitionDataset{4, 3, Source::Expert, {}}, dx,
                               phased_q_solver({0.9, 10, 4, 1}));
    EXPECT_EQ(res.policy, DeterministicPolicy::constant(4, 0));
    EXPECT_EQ(res.reward.table, Matrix::Zero(4, 3));
}

TEST(RunIlbrl, RingExpertIsImitatedExactly) {
    const auto mdp = ring();
    const auto expert = DeterministicPolicy({0, 0, 0, 0});
    const auto de = rollout(mdp, expert, 40, 1, {0, Source::Expert});
    const auto dx = rollout(mdp, StochasticPolicy::uniform(4, 2), 4000, 2);
    const auto res = run_ilbrl(de, dx, phased_q_solver({0.9, 20, 4, 1}));
    EXPECT_EQ(res.policy, expert);
    const Vector a = state_action_distribution(mdp, expert);
    const Vector b = state_action_distribution(mdp, res.policy);
    EXPECT_EQ(tv_distance(a, b), 0.0);
}

TEST(RunIlbrl, CoveredExpertIsRecoveredOnItsRecurrentClass) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = fixtures::random_mdp(700 + seed, 5, 3, 0.9, 0.01);
        const auto expert = greedy_policy(value_iteration(mdp, 1e-12, 100000));
        const auto de = rollout(mdp, expert, 3000, seed, {50, Source::Expert});
        const auto dx = rollout(mdp, StochasticPolicy::uniform(5, 3), 30000, seed + 1, {50, Source::Exploratory});
        // Oracle solver: value iteration on the intrinsic reward.
        const auto res = run_ilbrl(de, dx, exact_solver(mdp, 0.95));
        const auto rho = steady_state(chain_matrix(mdp, expert));
        for (std::size_t s = 0; s < 5; ++s)
            if (rho(static_cast<Eigen::Index>(s)) > 0.0) EXPECT_EQ(res.policy(s), expert(s)) << "seed " << seed;
    }
}

TEST(RunIlbrl, PlannedParametersDriveTheSolver) {
    PlannerInput in;
    in.epsilon = 8.0;
    in.delta = 0.5;
    in.num_states = 2;
    in.num_actions = 2;
    const auto p = plan_parameters(in);
    const auto opts = solver_options(p);
    EXPECT_DOUBLE_EQ(opts.gamma, p.gamma);
    EXPECT_EQ(static_cast<std::uint64_t>(opts.ell), p.ell);
    EXPECT_EQ(static_cast<std::uint64_t>(opts.m), p.m);
    in.epsilon = 1.0;
    EXPECT_THROW(solver_options(plan_parameters(in)), PlanningError);
}

TEST(RunRecord, JsonHasEveryField) {
    const auto mdp = fixtures::random_mdp(6, 3, 2, 0.9);
    const auto expert = greedy_policy(value_iteration(mdp, 1e-12, 100000));
    const auto de = rollout(mdp, expert, 500, 1, {50, Source::Expert});
    const auto dx = rollout(mdp, StochasticPolicy::uniform(3, 2), 5000, 2, {50, Source::Exploratory});
    const auto res = run_ilbrl(de, dx, exact_solver(mdp, 0.9));
    auto rec = evaluate_run(mdp, expert, res);
    rec.seed = 9;
    rec.config_hash = "cafe";
    const auto j = nlohmann::json::parse(format_run_record(rec));
    for (const char* key : {"seed", "config_hash", "mu_intrinsic", "mu_expert", "mu_imitator", "regret", "tv"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_NEAR(j["regret"].get<double>(), rec.mu_expert - rec.mu_imitator, 1e-15);
    // The true reward is a witness function in [0, 1], so regret <= TV.
    EXPECT_LE(rec.regret, rec.tv + 1e-12);
}

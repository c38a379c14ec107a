#include "fixtures.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/phased_q.hpp"

#include <gtest/gtest.h>

using namespace ilbrl;

namespace {

ParallelSamples hand_samples(std::size_t S, std::size_t A, std::vector<std::vector<int>> buckets) {
    ParallelSamples p;
    p.num_states = S;
    p.num_actions = A;
    p.per_pair_count = static_cast<int>(buckets[0].size());
    p.buckets = std::move(buckets);
    return p;
}

}  // namespace

TEST(PhasedQUpdate, ZeroTableGivesTheReward) {
    const auto mdp = fixtures::random_mdp(1, 3, 2, 0.9);
    const auto samples = ideal_parallel_samples(mdp, 4, 2);
    const ValueTable zero{Matrix::Zero(3, 2)};
    EXPECT_EQ(phased_q_update(zero, samples, mdp.rewards(), 0.9).q, mdp.rewards());
}

TEST(PhasedQUpdate, BucketMeanOfMaxValues) {
    Matrix q(3, 2);
    q << 0.0, 0.0, 0.2, 0.1, 0.6, -1.0;
    Matrix r = Matrix::Zero(3, 2);
    r(0, 0) = 1.0;
    const auto samples = hand_samples(3, 2, {{1, 2}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}});
    const auto out = phased_q_update(ValueTable{q}, samples, r, 0.5);
    EXPECT_DOUBLE_EQ(out.q(0, 0), 1.2);
}

TEST(PhasedQUpdate, DeterministicMdpMatchesTheBellmanBackup) {
    const auto mdp = fixtures::make_mdp({{{0, 1}, {1, 0}}, {{1, 0}, {0, 1}}}, {{0.3, 0.1}, {0.9, 0.2}}, 0.9);
    const auto samples = ideal_parallel_samples(mdp, 1, 4);
    Matrix q(2, 2);
    q << 1.0, 2.0, 0.5, 0.25;
    const auto out = phased_q_update(ValueTable{q}, samples, mdp.rewards(), 0.9);
    const Matrix expected = mdp.rewards() + 0.9 * expected_next_values(mdp, q.rowwise().maxCoeff());
    EXPECT_LT((out.q - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PhasedQUpdate, EmptyBucketIsAnError) {
    const auto samples = hand_samples(2, 1, {{1}, {}});
    EXPECT_THROW(phased_q_update(ValueTable{Matrix::Zero(2, 1)}, samples, Matrix::Zero(2, 1), 0.5), Error);
}

TEST(PhasedQLearn, ZeroRewardGivesZeroTableAndActionZero) {
    const auto mdp = fixtures::random_mdp(2, 4, 3, 0.9);
    const auto samples = ideal_parallel_samples(mdp, 20, 3);
    const auto res = phased_q_learn(samples, Matrix::Zero(4, 3), 0.9, 5);
    EXPECT_EQ(res.q.q.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(res.policy, DeterministicPolicy::constant(4, 0));
    EXPECT_EQ(res.samples_per_phase, 4);
}

TEST(PhasedQLearn, ExactModeEqualsValueIterationSteps) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = fixtures::random_mdp(seed, 6, 3, 0.9);
        const auto exact = phased_q_learn_exact(mdp, mdp.rewards(), 0.9, 25);
        const auto vi = value_iteration_steps(mdp, mdp.rewards(), 25);
        EXPECT_LT((exact.q.q - vi.q).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(PhasedQLearn, SlicesAreDisjoint) {
    // Every bucket is [phase index] repeated, so phase i can only see state i
    // if it reads its own slice.
    const std::size_t S = 4;
    std::vector<std::vector<int>> buckets(S, std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
    const auto samples = hand_samples(S, 1, buckets);
    Matrix r = Matrix::Zero(4, 1);
    r(3, 0) = 1.0;
    const auto res = phased_q_learn(samples, r, 0.5, 4);
    // Phase i reads successor i only: Q1 = r, Q2 = r + 0.5 V1(1) = r,
    // Q3 = r + 0.5 V2(2) = r, Q4 = r + 0.5 V3(3) = r + 0.5.
    ASSERT_EQ(res.bootstrap_values.size(), 4u);
    EXPECT_DOUBLE_EQ(res.q.q(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(res.q.q(3, 0), 1.5);
    EXPECT_EQ(res.samples_per_phase, 2);
}

TEST(PhasedQLearn, RecoversANearOptimalPolicyWithEnoughSamples) {
    int matches = 0;
    double worst_loss = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto mdp = fixtures::random_mdp(500 + seed, 5, 2, 0.8);
        const auto samples = ideal_parallel_samples(mdp, 200 * 30, seed);
        const auto res = phased_q_learn(samples, mdp.rewards(), 0.8, 30);
        const auto opt = greedy_policy(value_iteration(mdp, 1e-12, 100000));
        if (res.policy == opt) ++matches;
        const Vector loss = policy_value_discounted(mdp, opt).values(opt) -
                             policy_value_discounted(mdp, res.policy).values(res.policy);
        worst_loss = std::max(worst_loss, loss.maxCoeff());
    }
    // Misses are near-ties between actions; the value lost stays small.
    EXPECT_GE(matches, 85);
    EXPECT_LT(worst_loss, 0.1);
}

TEST(PhasedQLearn, EntriesStayInsideTheRewardRange) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = fixtures::random_mdp(seed, 5, 3, 0.9);
        const auto res = phased_q_learn(ideal_parallel_samples(mdp, 100, seed), mdp.rewards(), 0.9, 20);
        EXPECT_GE(res.q.q.minCoeff(), 0.0);
        EXPECT_LE(res.q.q.maxCoeff(), 10.0 + 1e-9);
    }
}

TEST(PhasedQLearn, ConcentrationErrorIsZeroInExactMode) {
    const auto mdp = fixtures::random_mdp(7, 4, 2, 0.9);
    const auto samples = ideal_parallel_samples(mdp, 600, 1);
    const auto res = phased_q_learn(samples, mdp.rewards(), 0.9, 30);
    const double err = max_concentration_error(mdp, samples, res);
    EXPECT_GT(err, 0.0);
    EXPECT_LT(err, 1.0);
}

TEST(PhasedQLearn, TooFewSamplesForThePhaseCount) {
    const auto mdp = fixtures::random_mdp(7, 4, 2, 0.9);
    EXPECT_THROW(phased_q_learn(ideal_parallel_samples(mdp, 5, 1), mdp.rewards(), 0.9, 10), Error);
}

#include "fixtures.hpp"
#include "oracles.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/ope.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ilbrl;

namespace {

OpeConfig converging(double discount) {
    OpeConfig c;
    c.learning_rate = 0.5;
    c.lr_decay = 0.5;
    c.tau = 0.5;
    c.passes = 300;
    c.discount = discount;
    return c;
}

TransitionDataset uniform_data(const TabularMdp& mdp, int n, std::uint64_t seed, int horizon = 20) {
    return rollout(mdp, StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions()), n, seed,
                   {horizon, Source::Exploratory});
}

std::vector<PolicyEstimate> estimates(std::initializer_list<double> values) {
    std::vector<PolicyEstimate> out;
    for (double v : values) out.push_back({v, false});
    return out;
}

}  // namespace

TEST(OpeConfig, Validation) {
    OpeConfig c;
    c.learning_rate = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.expert_data_fraction = 1.2;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_NO_THROW(OpeConfig{}.validate());
}

TEST(Esarsa, ZeroRewardsStayAtZero) {
    const auto mdp = fixtures::random_mdp(1, 4, 2, 0.9).with_rewards(Matrix::Zero(4, 2));
    const auto res = esarsa_evaluate(uniform_data(mdp, 2000, 1), DeterministicPolicy({0, 1, 0, 1}), converging(0.9), 3);
    EXPECT_FALSE(res.diverged);
    EXPECT_EQ(res.value.q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Esarsa, ZeroDiscountConvergesToMeanRewards) {
    const auto mdp = fixtures::random_mdp(2, 3, 2, 0.9);
    auto data = uniform_data(mdp, 3000, 2);
    Rng rng(5);
    for (auto& r : data.records) r.reward += 0.2 * (rng.uniform() - 0.5);  // noisy observed rewards
    Matrix sum = Matrix::Zero(3, 2), count = Matrix::Zero(3, 2);
    for (const auto& r : data.records) {
        sum(r.state, r.action) += r.reward;
        count(r.state, r.action) += 1.0;
    }
    auto cfg = converging(0.0);
    cfg.learning_rate = 0.02;
    cfg.lr_decay = 0.2;
    cfg.passes = 400;
    const auto res = esarsa_evaluate(data, DeterministicPolicy({0, 0, 0}), cfg, 1);
    const Matrix mean = sum.cwiseQuotient(count);
    EXPECT_LT((res.value.q - mean).cwiseAbs().maxCoeff(), 2e-3);
}

TEST(Esarsa, ConvergesToTheCertaintyEquivalenceValue) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto mdp = fixtures::random_mdp(30 + seed, 4, 2, 0.9);
        const auto data = uniform_data(mdp, 3000, seed);
        const auto policy = DeterministicPolicy({1, 0, 0, 1});
        const auto res = esarsa_evaluate(data, policy, converging(0.9), seed);
        const auto ce = oracle::certainty_equivalence_q(data, policy, 0.9);
        for (std::size_t i = 0; i < ce.size(); ++i) {
            if (std::isnan(static_cast<double>(ce[i]))) continue;
            const auto s = static_cast<Eigen::Index>(i / 2);
            const auto a = static_cast<Eigen::Index>(i % 2);
            EXPECT_NEAR(res.value.q(s, a), static_cast<double>(ce[i]), 0.05 / (1.0 - 0.9));
        }
    }
}

TEST(Esarsa, SameSeedIsReproducible) {
    const auto mdp = fixtures::random_mdp(3, 4, 2, 0.9);
    const auto data = uniform_data(mdp, 1000, 1);
    const auto a = esarsa_evaluate(data, DeterministicPolicy({0, 1, 0, 1}), OpeConfig{}, 11);
    const auto b = esarsa_evaluate(data, DeterministicPolicy({0, 1, 0, 1}), OpeConfig{}, 11);
    EXPECT_EQ(a.value.q, b.value.q);
    EXPECT_EQ(a.converged_pass, b.converged_pass);
}

TEST(Esarsa, OversizedStepsDiverge) {
    const auto mdp = fixtures::random_mdp(4, 4, 2, 0.9);
    auto cfg = converging(0.9);
    cfg.learning_rate = 2.5;
    cfg.lr_decay = 0.0;
    const auto res = esarsa_evaluate(uniform_data(mdp, 1000, 1), DeterministicPolicy({0, 1, 0, 1}), cfg, 1);
    EXPECT_TRUE(res.diverged);
}

TEST(Esarsa, ThresholdFlagsLargeValues) {
    const auto mdp = fixtures::random_mdp(4, 4, 2, 0.9).with_rewards(Matrix::Ones(4, 2));
    auto cfg = converging(0.9);
    cfg.divergence_threshold = 5.0;  // true values are 10
    EXPECT_TRUE(esarsa_evaluate(uniform_data(mdp, 1000, 1), DeterministicPolicy({0, 0, 0, 0}), cfg, 1).diverged);
}

TEST(InitialValues, HeldOutAverages) {
    const auto mdp = fixtures::random_mdp(5, 3, 2, 0.9);
    const auto data = uniform_data(mdp, 600, 4, 10);
    const auto held = initial_records(data);
    const auto policy = DeterministicPolicy({1, 1, 0});
    const auto exact = oracle::policy_value(mdp, policy);
    double expected = 0.0;
    for (const auto& r : held.records) expected += static_cast<double>(exact[static_cast<std::size_t>(r.state)]);
    expected /= static_cast<double>(held.size());
    EXPECT_NEAR(true_initial_value(mdp, policy, held, 0.9), expected, 1e-12);
    EXPECT_NEAR(sampled_initial_value(mdp, policy, held, 0.9, 400, 200, 3), expected, 0.1);
    ValueTable q{policy_value_discounted(mdp, policy).q};
    EXPECT_NEAR(initial_state_value(q, policy, held), expected, 1e-12);
    EXPECT_THROW(initial_state_value(q, policy, TransitionDataset{}), InvalidArgument);
}

TEST(RankError, Examples) {
    const std::vector<double> truths{3.0, 2.0, 1.0};
    EXPECT_EQ(rank_error(estimates({30, 20, 10}), truths).error, 0);
    EXPECT_EQ(rank_error(estimates({10, 20, 30}), truths).error, 4);
    auto one_diverged = estimates({0, 20, 10});
    one_diverged[0].diverged = true;
    EXPECT_EQ(rank_error(one_diverged, truths).error, 3);
    EXPECT_THROW(rank_error(estimates({1}), std::vector<double>{1.0}), InvalidArgument);
    EXPECT_DOUBLE_EQ(rank_error(estimates({3.5, 2, 1}), truths).distance, 0.5);
}

TEST(RankError, AllDivergedCostsKEach) {
    auto e = estimates({0, 0, 0});
    for (auto& x : e) x.diverged = true;
    EXPECT_EQ(rank_error(e, std::vector<double>{3, 2, 1}).error, 9);
}

TEST(TuneOpe, PrefersTheConvergingLearningRate) {
    const auto mdp = fixtures::random_mdp(60, 4, 2, 0.9);
    const auto known_policies = {DeterministicPolicy({0, 0, 0, 0}), DeterministicPolicy({1, 1, 1, 1}),
                                 DeterministicPolicy({0, 1, 0, 1})};
    auto good = converging(0.9);
    good.passes = 100;
    auto bad = good;
    bad.learning_rate = 2.5;
    bad.lr_decay = 0.0;
    const std::vector<OpeConfig> grid{bad, good};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = uniform_data(mdp, 2000, seed);
        const auto split = split_dataset(data, 0.01, 0.8);
        std::vector<KnownPolicy> known;
        for (const auto& p : known_policies)
            known.push_back({p, true_initial_value(mdp, p, split.final_validation, 0.9)});
        const std::vector<std::uint64_t> seeds{1, 2};
        const auto res = tune_ope(split.evaluation_train, split.final_validation, known, grid, seeds);
        EXPECT_EQ(res.best, 1u) << "seed " << seed;
        EXPECT_TRUE(res.scores[0].all_diverged);
        EXPECT_LE(res.config.passes, good.passes);
    }
}

TEST(TuneOpe, EveryConfigDivergingIsAnError) {
    const auto mdp = fixtures::random_mdp(61, 3, 2, 0.9);
    const auto data = uniform_data(mdp, 600, 1);
    const auto split = split_dataset(data, 0.1, 0.5);
    auto bad = converging(0.9);
    bad.learning_rate = 2.5;
    bad.lr_decay = 0.0;
    std::vector<KnownPolicy> known{{DeterministicPolicy({0, 0, 0}), 1.0}, {DeterministicPolicy({1, 1, 1}), 2.0}};
    const std::vector<OpeConfig> grid{bad};
    const std::vector<std::uint64_t> seeds{1};
    EXPECT_THROW(tune_ope(split.evaluation_train, split.final_validation, known, grid, seeds), Error);
}

TEST(SelectPolicy, SingleCandidateAndDominance) {
    const auto mdp = fixtures::random_mdp(70, 4, 2, 0.9);
    const auto data = uniform_data(mdp, 4000, 3);
    const auto split = split_dataset(data, 0.1, 0.8);
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto single = select_policy({{DeterministicPolicy({0, 0, 0, 0})}}, split.evaluation_train,
                                      split.final_validation, converging(0.9), seeds);
    EXPECT_EQ(single.best, 0u);

    const auto best = greedy_policy(value_iteration(mdp.with_discount(0.9), 1e-12, 100000));
    DeterministicPolicy worst = best;
    {
        // Per-state worst action: argmin of the optimal Q.
        const auto q = value_iteration(mdp.with_discount(0.9), 1e-12, 100000).q;
        std::vector<int> a(4);
        for (Eigen::Index s = 0; s < 4; ++s) q.row(s).minCoeff(&a[static_cast<std::size_t>(s)]);
        worst = DeterministicPolicy(a);
    }
    const auto pick = select_policy({{worst}, {best}}, split.evaluation_train, split.final_validation,
                                    converging(0.9), seeds);
    EXPECT_EQ(pick.best, 1u);
    ASSERT_TRUE(pick.scores[0] && pick.scores[1]);
    EXPECT_GT(*pick.scores[1], *pick.scores[0]);
    EXPECT_EQ(pick.cells.size(), 4u);
}

TEST(SelectPolicy, AlwaysDivergingCandidateIsNeverSelected) {
    const auto mdp = fixtures::random_mdp(71, 4, 2, 0.9);
    // Rewards 1 on action 0, 0.1 on action 1: the all-0 policy is truly best
    // but its values exceed the threshold and it is flagged on every run.
    Matrix r(4, 2);
    r.col(0).setOnes();
    r.col(1).setConstant(0.1);
    const auto rewarded = mdp.with_rewards(r);
    const auto data = uniform_data(rewarded, 3000, 5);
    const auto split = split_dataset(data, 0.1, 0.8);
    auto cfg = converging(0.9);
    cfg.divergence_threshold = 5.0;
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto res = select_policy({{DeterministicPolicy({0, 0, 0, 0})}, {DeterministicPolicy({1, 1, 1, 1})}},
                                   split.evaluation_train, split.final_validation, cfg, seeds);
    EXPECT_EQ(res.best, 1u);
    EXPECT_FALSE(res.scores[0].has_value());
    for (const auto& c : res.cells)
        if (c.hyperparam == 0) EXPECT_TRUE(c.diverged);
}

TEST(Protocol, RunsEveryPhase) {
    const auto mdp = fixtures::random_mdp(80, 4, 2, 0.9);
    const auto data = uniform_data(mdp, 4000, 1);
    const std::vector<DeterministicPolicy> known{DeterministicPolicy({0, 0, 0, 0}), DeterministicPolicy({1, 1, 1, 1})};
    ProtocolOptions opts;
    opts.grid = {converging(0.9)};
    opts.grid[0].passes = 60;
    opts.hyperparams = 2;
    opts.policy_seeds = {0, 1};
    const TruthFn truth = [&](const DeterministicPolicy& p, const TransitionDataset& d) {
        return true_initial_value(mdp, p, d, 0.9);
    };
    const TrainFn train = [](const TransitionDataset&, std::size_t n, std::uint64_t) {
        return DeterministicPolicy::constant(4, static_cast<int>(n));
    };
    const auto res = run_protocol(data, known, truth, train, opts);
    EXPECT_EQ(res.candidates.size(), 2u);
    EXPECT_EQ(res.candidates[1][0], DeterministicPolicy::constant(4, 1));
    EXPECT_EQ(res.split.train.size(), 2000u);
    EXPECT_LT(res.selection.best, 2u);
}

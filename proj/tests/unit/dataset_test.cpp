#include "fixtures.hpp"

#include "ilbrl/bounds.hpp"
#include "ilbrl/dataset.hpp"
#include "ilbrl/dataset_io.hpp"
#include "ilbrl/errors.hpp"
#include "ilbrl/sampler.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace ilbrl;

namespace {

TransitionDataset numbered(int n, int horizon) {
    const auto mdp = fixtures::random_mdp(3, 3, 2, 0.9);
    return rollout(mdp, StochasticPolicy::uniform(3, 2), n, 5, {horizon, Source::Exploratory});
}

}  // namespace

TEST(Rollout, DeterministicMdpGivesTheUniqueTrajectory) {
    // 0 -> 1 -> 2 -> 0 under action 0, starting at 0.
    auto mdp = fixtures::make_mdp({{{0, 1, 0}, {1, 0, 0}}, {{0, 0, 1}, {0, 1, 0}}, {{1, 0, 0}, {0, 0, 1}}},
                                  {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}}, 0.9);
    Vector p0(3);
    p0 << 1, 0, 0;
    mdp = TabularMdp(3, 2, mdp.transitions(), mdp.rewards(), p0, 0.9);
    const auto d = rollout(mdp, DeterministicPolicy({0, 0, 0}), 6, 123);
    const int expected[] = {0, 1, 2, 0, 1, 2};
    ASSERT_EQ(d.size(), 6u);
    for (int k = 0; k < 6; ++k) {
        EXPECT_EQ(d.records[static_cast<std::size_t>(k)].state, expected[k]);
        EXPECT_EQ(d.records[static_cast<std::size_t>(k)].step, k);
    }
    EXPECT_DOUBLE_EQ(d.records[2].reward, 0.5);
}

TEST(Rollout, SingleStepHasNoNextAction) {
    const auto d = numbered(1, 0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_FALSE(d.records[0].next_action.has_value());
    EXPECT_TRUE(d.records[0].is_initial());
}

TEST(Rollout, SameSeedIsBitIdentical) {
    const auto mdp = fixtures::random_mdp(8, 5, 3, 0.9);
    const auto a = rollout(mdp, StochasticPolicy::uniform(5, 3), 5000, 77, {40, Source::Exploratory});
    const auto b = rollout(mdp, StochasticPolicy::uniform(5, 3), 5000, 77, {40, Source::Exploratory});
    EXPECT_EQ(format_dataset(a), format_dataset(b));
    const auto c = rollout(mdp, StochasticPolicy::uniform(5, 3), 5000, 78, {40, Source::Exploratory});
    EXPECT_NE(format_dataset(a), format_dataset(c));
}

TEST(Rollout, RecordsCarryNextActionsAndHorizonFlags) {
    const auto d = numbered(1000, 25);
    d.validate();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.records[i];
        EXPECT_EQ(r.timeout, r.step == 24);
        if (i + 1 < d.size() && d.records[i + 1].episode == r.episode)
            EXPECT_EQ(r.next_action, d.records[i + 1].action);
    }
    EXPECT_EQ(d.records.back().episode, 39);
}

TEST(Rollout, VisitFrequenciesApproachTheStationaryDistribution) {
    const auto mdp = fixtures::random_mdp(21, 6, 2, 0.9);
    const auto p = DeterministicPolicy({0, 1, 1, 0, 1, 0});
    const auto d = rollout(mdp, p, 100000, 9);
    Vector freq = Vector::Zero(6);
    for (const auto& r : d.records) freq(r.state) += 1.0;
    freq /= static_cast<double>(d.size());
    EXPECT_LE(tv_distance(freq, steady_state(chain_matrix(mdp, p))), 0.02);
}

TEST(Dataset, ValidateCatchesBrokenBookkeeping) {
    auto d = numbered(50, 0);
    d.records[10].next_state = (d.records[10].next_state + 1) % 3;
    EXPECT_THROW(d.validate(), ModelError);
    d = numbered(50, 0);
    d.records[3].next_action.reset();
    EXPECT_THROW(d.validate(), ModelError);
    d = numbered(50, 0);
    d.records[7].action = 5;
    EXPECT_THROW(d.validate(), ModelError);
}

TEST(Merge, Examples) {
    const auto mdp = fixtures::random_mdp(4, 4, 2, 0.9);
    const auto e = rollout(mdp, DeterministicPolicy({0, 0, 1, 1}), 300, 1, {30, Source::Expert});
    const auto x = rollout(mdp, StochasticPolicy::uniform(4, 2), 500, 2, {30, Source::Exploratory});
    TransitionDataset empty;
    EXPECT_EQ(merge(empty, x), x);
    const auto u = merge(e, x);
    EXPECT_EQ(u.size(), e.size() + x.size());
    EXPECT_EQ(u.source, Source::Mixed);
    u.validate();

    std::set<std::pair<int, int>> in_e, in_x, in_u;
    for (const auto& r : e.records) in_e.insert({r.state, r.action});
    for (const auto& r : x.records) in_x.insert({r.state, r.action});
    for (const auto& r : u.records) in_u.insert({r.state, r.action});
    std::set<std::pair<int, int>> both = in_e;
    both.insert(in_x.begin(), in_x.end());
    EXPECT_EQ(in_u, both);
    EXPECT_EQ(filter_source(u, Source::Expert).records, e.records);

    TransitionDataset other{5, 2, Source::Expert, {}};
    other.records.push_back({});
    EXPECT_THROW(merge(other, x), InvalidArgument);
}

TEST(ShuffleEpisodes, KeepsEpisodesWholeAndFlagsAttached) {
    const auto d = numbered(2000, 20);
    const auto s = shuffle_episodes(d, 17);
    EXPECT_EQ(s.size(), d.size());
    s.validate();
    EXPECT_NE(s.records, d.records);
    std::map<int, std::vector<TransitionRecord>> by_episode;
    for (const auto& r : d.records) by_episode[r.episode].push_back(r);
    std::map<int, std::vector<TransitionRecord>> shuffled;
    for (const auto& r : s.records) shuffled[r.episode].push_back(r);
    EXPECT_EQ(by_episode, shuffled);
    EXPECT_EQ(shuffle_episodes(d, 17), s);
}

TEST(SplitDataset, IndexArithmetic) {
    const auto d = numbered(10, 2);
    const auto split = split_dataset(d, 0.5, 0.5);
    EXPECT_EQ(split.train.size(), 5u);
    EXPECT_EQ(split.evaluation_train.size(), 2u);
    for (const auto& r : split.final_validation.records) EXPECT_EQ(r.step, 0);
    EXPECT_THROW(split_dataset(d, 0.0, 0.5), InvalidArgument);
    EXPECT_THROW(split_dataset(d, 0.5, 1.0), InvalidArgument);
    EXPECT_THROW(split_dataset(numbered(3, 0), 0.5, 0.5), InvalidArgument);
}

TEST(SplitDataset, PartitionsWithoutOverlapOrLoss) {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const int n = 20 + static_cast<int>(rng.below(500));
        const double f = 0.1 + 0.8 * rng.uniform();
        const double g = 0.1 + 0.8 * rng.uniform();
        const auto d = numbered(n, 1);  // horizon 1: every record is initial
        const auto split = split_dataset(d, f, g);
        std::vector<TransitionRecord> joined = split.train.records;
        joined.insert(joined.end(), split.evaluation_train.records.begin(), split.evaluation_train.records.end());
        joined.insert(joined.end(), split.final_validation.records.begin(), split.final_validation.records.end());
        EXPECT_EQ(joined, d.records);
    }
}

TEST(ComposeMixture, HitsTheRequestedFraction) {
    const auto mdp = fixtures::random_mdp(4, 4, 2, 0.9);
    const auto e = rollout(mdp, DeterministicPolicy({0, 0, 1, 1}), 300, 1, {30, Source::Expert});
    const auto x = rollout(mdp, StochasticPolicy::uniform(4, 2), 700, 2, {30, Source::Exploratory});
    const auto u = merge(e, x);
    for (double f : {0.0, 0.25, 0.8, 1.0}) {
        const auto m = compose_mixture(u, f, 5);
        EXPECT_EQ(m.size(), u.size());
        EXPECT_EQ(filter_source(m, Source::Expert).size(),
                  static_cast<std::size_t>(std::llround(f * static_cast<double>(u.size()))));
    }
    EXPECT_THROW(compose_mixture(x, 0.5, 1), InvalidArgument);
    EXPECT_THROW(compose_mixture(u, 1.5, 1), InvalidArgument);
}

TEST(DatasetIo, RoundTripIsBitExact) {
    const auto mdp = fixtures::random_mdp(30, 5, 3, 0.9);
    auto d = rollout(mdp, StochasticPolicy::uniform(5, 3), 3000, 8, {37, Source::Expert});
    d.records[5].reward = 0.1 + 0.2;  // not representable in short decimal form
    d.records.back().terminal = true;
    std::map<std::string, std::string> prov{{"config_hash", "abc"}, {"seed", "9"}};
    const auto text = format_dataset(d, prov);
    std::map<std::string, std::string> back;
    const auto parsed = parse_dataset(text, &back);
    EXPECT_EQ(parsed, d);
    EXPECT_EQ(back, prov);
    EXPECT_EQ(format_dataset(parsed, back), text);
}

TEST(DatasetIo, MalformedInputIsRejected) {
    EXPECT_THROW(parse_dataset("garbage"), ParseError);
    const auto text = format_dataset(numbered(5, 0));
    EXPECT_THROW(parse_dataset(text + "1\t2\n"), ParseError);
}

TEST(Sampler, ThinningPeriodExample) {
    EXPECT_EQ(thinning_period(1, 0.25), 3);
    EXPECT_EQ(thinning_period(2, 0.25), 6);
}

TEST(Sampler, SingleStateFillsOneBucket) {
    const auto mdp = fixtures::make_mdp({{{1.0}}}, {{0.5}}, 0.9);
    const auto s = simulate_parallel_sampler(mdp, StochasticPolicy::uniform(1, 1), 10, 1.0, 1, 0.1, 3);
    EXPECT_EQ(s.bucket(0, 0).size(), 10u);
    EXPECT_EQ(s.thinning_period, 1);
    EXPECT_EQ(s.raw_steps, 11);  // one burn-in period before the first kept sample
}

TEST(Sampler, BucketsHoldExactlyTheRequestedCount) {
    const auto mdp = fixtures::random_mdp(40, 4, 2, 0.9, 0.05);
    const auto explore = StochasticPolicy::uniform(4, 2);
    const auto info = chain_analysis(mdp, explore);
    const auto s = simulate_parallel_sampler(mdp, explore, 7, info.p_min, info.mixing_time, 0.1, 4);
    for (const auto& b : s.buckets) EXPECT_EQ(b.size(), 7u);
    EXPECT_GT(s.raw_steps, 0);
}

TEST(Sampler, ExhaustedBudgetIsACoverageError) {
    const auto mdp = fixtures::random_mdp(40, 4, 2, 0.9, 0.05);
    const auto explore = StochasticPolicy::uniform(4, 2);
    EXPECT_THROW(simulate_parallel_sampler(mdp, explore, 50, 0.05, 1, 0.1, 4, {1.0, 20}), CoverageError);
}

TEST(Sampler, BucketMarginalsMatchTheTransitionKernel) {
    const auto mdp = fixtures::random_mdp(41, 4, 2, 0.9, 0.05);
    const auto explore = StochasticPolicy::uniform(4, 2);
    const auto info = chain_analysis(mdp, explore);
    const auto s = simulate_parallel_sampler(mdp, explore, 10000, info.p_min, info.mixing_time, 0.1, 6);
    for (std::size_t st = 0; st < 4; ++st)
        for (std::size_t a = 0; a < 2; ++a) {
            Vector freq = Vector::Zero(4);
            for (int next : s.bucket(st, a)) freq(next) += 1.0;
            freq /= 10000.0;
            const auto row = mdp.transition(st, a);
            const Vector p = Eigen::Map<const Vector>(row.data(), 4);
            EXPECT_LE(tv_distance(freq, p), 0.05);
        }
}

TEST(Sampler, BucketsFromDatasetUseRecordedSuccessors) {
    const auto mdp = fixtures::random_mdp(42, 3, 2, 0.9);
    const auto d = rollout(mdp, StochasticPolicy::uniform(3, 2), 5000, 1);
    const auto s = buckets_from_dataset(d, 20);
    for (std::size_t st = 0; st < 3; ++st)
        for (std::size_t a = 0; a < 2; ++a) {
            std::vector<int> expected;
            for (const auto& r : d.records)
                if (r.state == static_cast<int>(st) && r.action == static_cast<int>(a) && expected.size() < 20)
                    expected.push_back(r.next_state);
            EXPECT_EQ(s.bucket(st, a), expected);
        }
    EXPECT_THROW(buckets_from_dataset(d, 100000), CoverageError);
}

TEST(Sampler, IdealSamplesAreSeedDeterministic) {
    const auto mdp = fixtures::random_mdp(43, 4, 3, 0.9);
    EXPECT_EQ(ideal_parallel_samples(mdp, 30, 1).buckets, ideal_parallel_samples(mdp, 30, 1).buckets);
    const auto s = ideal_parallel_samples(mdp, 30, 1);
    const auto slice = s.slice(2, 10);
    for (std::size_t i = 0; i < s.buckets.size(); ++i)
        EXPECT_EQ(slice.buckets[i], std::vector<int>(s.buckets[i].begin() + 20, s.buckets[i].begin() + 30));
}

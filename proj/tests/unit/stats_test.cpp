#include "oracles.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/random.hpp"
#include "ilbrl/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace ilbrl;

TEST(NormalizedScore, Examples) {
    EXPECT_DOUBLE_EQ(normalized_score(2.0, 2.0, 6.0), 0.0);
    EXPECT_DOUBLE_EQ(normalized_score(6.0, 2.0, 6.0), 100.0);
    EXPECT_DOUBLE_EQ(normalized_score(4.0, 2.0, 6.0), 50.0);
    EXPECT_THROW(normalized_score(1.0, 3.0, 3.0), InvalidArgument);
}

TEST(Iqm, Examples) {
    EXPECT_DOUBLE_EQ(iqm(std::vector<double>{1, 2, 3, 4}), 2.5);
    EXPECT_DOUBLE_EQ(iqm(std::vector<double>{7, 7, 7}), 7.0);
    EXPECT_DOUBLE_EQ(iqm(std::vector<double>{0, 10, 20, 30, 40, 1000}), 25.0);
    EXPECT_THROW(iqm(std::vector<double>{}), InvalidArgument);
}

TEST(Iqm, MatchesTheReplicationOracle) {
    Rng rng(1);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> x(1 + rng.below(40));
        for (auto& v : x) v = 100.0 * rng.uniform();
        EXPECT_NEAR(iqm(x), oracle::replicated_iqm(x), 1e-10);
    }
}

TEST(Iqm, BoundedSymmetricAndPermutationInvariant) {
    Rng rng(2);
    for (int k = 0; k < 300; ++k) {
        std::vector<double> x(1 + rng.below(30));
        for (auto& v : x) v = rng.uniform() * 10 - 5;
        const double m = iqm(x);
        EXPECT_GE(m, *std::min_element(x.begin(), x.end()));
        EXPECT_LE(m, *std::max_element(x.begin(), x.end()));
        auto y = x;
        for (std::size_t i = y.size(); i > 1; --i) std::swap(y[i - 1], y[rng.below(i)]);
        EXPECT_EQ(iqm(y), m);
        std::vector<double> sym = x;
        const double c = 3.0;
        for (double v : x) sym.push_back(2 * c - v);
        const double mean = std::accumulate(sym.begin(), sym.end(), 0.0) / static_cast<double>(sym.size());
        EXPECT_NEAR(iqm(sym), mean, 1e-12);
    }
}

TEST(AggregateIqm, MeanOfPerTaskIqms) {
    EXPECT_DOUBLE_EQ(aggregate_iqm({{1, 2, 3, 4}, {7, 7}}), (2.5 + 7.0) / 2);
}

TEST(QuantileSorted, TypeSeven) {
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.25), 1.75);
}

TEST(Bootstrap, ZeroVarianceGivesADegenerateInterval) {
    const auto ci = stratified_bootstrap_iqm_ci({{3, 3, 3}, {5, 5}}, 200, 0.95, 1);
    EXPECT_DOUBLE_EQ(ci.point, 4.0);
    EXPECT_DOUBLE_EQ(ci.lo, 4.0);
    EXPECT_DOUBLE_EQ(ci.hi, 4.0);
}

TEST(Bootstrap, DeterministicAcrossWorkerCounts) {
    Rng rng(3);
    std::vector<std::vector<double>> tasks(3, std::vector<double>(10));
    for (auto& t : tasks)
        for (auto& v : t) v = rng.uniform();
    const auto a = stratified_bootstrap_iqm_ci(tasks, 1000, 0.9, 7, 1);
    const auto b = stratified_bootstrap_iqm_ci(tasks, 1000, 0.9, 7, 8);
    EXPECT_EQ(a.lo, b.lo);
    EXPECT_EQ(a.hi, b.hi);
    EXPECT_EQ(a.point, aggregate_iqm(tasks));
    EXPECT_LE(a.lo, a.point);
    EXPECT_GE(a.hi, a.point);
    double lo = 1e9, hi = -1e9;
    for (const auto& t : tasks) {
        lo = std::min(lo, *std::min_element(t.begin(), t.end()));
        hi = std::max(hi, *std::max_element(t.begin(), t.end()));
    }
    EXPECT_GE(a.lo, lo);
    EXPECT_LE(a.hi, hi);
}

TEST(Bootstrap, RejectsBadArguments) {
    EXPECT_THROW(stratified_bootstrap_iqm_ci({{1, 2}}, 99, 0.95, 1), InvalidArgument);
    EXPECT_THROW(stratified_bootstrap_iqm_ci({{1, 2}}, 100, 1.0, 1), InvalidArgument);
    EXPECT_THROW(stratified_bootstrap_iqm_ci({{1, 2}, {}}, 100, 0.95, 1), InvalidArgument);
}

TEST(MeanNormalCi, KnownValues) {
    const auto ci = mean_normal_ci(std::vector<double>{1, 2, 3, 4, 5});
    EXPECT_DOUBLE_EQ(ci.point, 3.0);
    // s = sqrt(2.5), z = 1.959963984540054.
    EXPECT_NEAR(ci.hi - ci.point, 1.959963984540054 * std::sqrt(2.5 / 5.0), 1e-12);
    EXPECT_NEAR(ci.point - ci.lo, ci.hi - ci.point, 1e-12);
}

TEST(PerformanceProfile, Examples) {
    const std::vector<double> scores{10, 30};
    const std::vector<double> taus{0, 20, 40};
    EXPECT_EQ(performance_profile(scores, taus), (std::vector<double>{1.0, 0.5, 0.0}));
}

TEST(PerformanceProfile, MonotoneStepFunctionInUnitRange) {
    Rng rng(4);
    std::vector<double> scores(50);
    for (auto& s : scores) s = 120 * rng.uniform() - 10;
    std::vector<double> taus;
    for (int t = -20; t <= 130; t += 5) taus.push_back(t);
    const auto f = performance_profile(scores, taus);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_GE(f[i], 0.0);
        EXPECT_LE(f[i], 1.0);
        if (i > 0) EXPECT_LE(f[i], f[i - 1]);
    }
    const auto csv = format_profile_csv(taus, f);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,fraction");
}

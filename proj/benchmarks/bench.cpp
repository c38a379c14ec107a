#include "ilbrl/dataset.hpp"
#include "ilbrl/generators.hpp"
#include "ilbrl/mdp.hpp"
#include "ilbrl/ope.hpp"
#include "ilbrl/phased_q.hpp"
#include "ilbrl/sampler.hpp"
#include "ilbrl/stats.hpp"
#include "ilbrl/support_reward.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace ilbrl;

namespace {

TabularMdp bench_mdp(std::size_t states, std::size_t actions) {
    Rng rng(7);
    return random_mdp(rng, MdpFamily{states, actions, 0.95, 1.0, 0.001, true});
}

void BM_ValueIteration(benchmark::State& state) {
    const auto mdp = bench_mdp(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration(mdp, 1e-10, 100000));
}
BENCHMARK(BM_ValueIteration)->Arg(10)->Arg(50)->Arg(200);

void BM_PhasedQ(benchmark::State& state) {
    const auto mdp = bench_mdp(static_cast<std::size_t>(state.range(0)), 4);
    const int ell = 50, m = 8;
    const auto samples = ideal_parallel_samples(mdp, ell * m, 3);
    for (auto _ : state) benchmark::DoNotOptimize(phased_q_learn(samples, mdp.rewards(), 0.95, ell));
}
BENCHMARK(BM_PhasedQ)->Arg(10)->Arg(50);

void BM_ExpectedSarsa(benchmark::State& state) {
    const auto mdp = bench_mdp(20, 4);
    const auto data = rollout(mdp, StochasticPolicy::uniform(20, 4), state.range(0), 5, {50, Source::Exploratory});
    OpeConfig cfg;
    cfg.passes = 20;
    cfg.learning_rate = 0.5;
    Rng rng(9);
    const auto policy = random_policy(rng, 20, 4);
    for (auto _ : state) benchmark::DoNotOptimize(esarsa_evaluate(data, policy, cfg, 1));
}
BENCHMARK(BM_ExpectedSarsa)->Arg(10000)->Arg(100000);

void BM_LabelDataset(benchmark::State& state) {
    Rng rng(11);
    FeatureDataset d;
    d.dimension = 4;
    for (long i = 0; i < state.range(0); ++i)
        d.add(std::vector<double>{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()}, i % 10 == 0);
    const auto search = state.range(1) == 0 ? NeighbourSearch::Scan : NeighbourSearch::KdTree;
    for (auto _ : state) benchmark::DoNotOptimize(label_dataset(d, search));
}
BENCHMARK(BM_LabelDataset)->Args({5000, 0})->Args({5000, 1})->Args({50000, 1});

void BM_StratifiedBootstrap(benchmark::State& state) {
    Rng rng(13);
    std::vector<std::vector<double>> tasks(8, std::vector<double>(25));
    for (auto& t : tasks)
        for (auto& v : t) v = rng.uniform();
    for (auto _ : state)
        benchmark::DoNotOptimize(stratified_bootstrap_iqm_ci(tasks, static_cast<int>(state.range(0)), 0.95, 17, 1));
}
BENCHMARK(BM_StratifiedBootstrap)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();

#include "ilbrl/sampler.hpp"

#include "ilbrl/bounds.hpp"
#include "ilbrl/errors.hpp"
#include "ilbrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ilbrl {

ParallelSamples ParallelSamples::slice(int i, int m) const {
    if (i < 0 || m < 1 || static_cast<long long>(i + 1) * m > per_pair_count)
        throw InvalidArgument("slice " + std::to_string(i) + " of size " + std::to_string(m) +
                              " exceeds the " + std::to_string(per_pair_count) +
                              " samples per pair");
    ParallelSamples out;
    out.num_states = num_states;
    out.num_actions = num_actions;
    out.per_pair_count = m;
    out.thinning_period = thinning_period;
    out.raw_steps = raw_steps;
    out.buckets.reserve(buckets.size());
    for (const auto& b : buckets)
        out.buckets.emplace_back(b.begin() + static_cast<std::ptrdiff_t>(i) * m,
                                 b.begin() + static_cast<std::ptrdiff_t>(i + 1) * m);
    return out;
}

namespace {

ParallelSamples empty_samples(const TabularMdp& mdp, int per_pair_count) {
    if (per_pair_count < 1) throw InvalidArgument("per_pair_count must be at least 1");
    ParallelSamples out;
    out.num_states = mdp.num_states();
    out.num_actions = mdp.num_actions();
    out.per_pair_count = per_pair_count;
    out.buckets.resize(mdp.num_states() * mdp.num_actions());
    for (auto& b : out.buckets) b.reserve(static_cast<std::size_t>(per_pair_count));
    return out;
}

}  // namespace

ParallelSamples simulate_parallel_sampler(const TabularMdp& mdp, const StochasticPolicy& explore,
                                          int per_pair_count, double p_min, int t_mix,
                                          double delta_second, std::uint64_t seed,
                                          const SamplerOptions& options) {
    if (explore.num_states() != mdp.num_states() || explore.num_actions() != mdp.num_actions())
        throw ModelError("exploratory policy dimensions do not match the MDP");
    ParallelSamples out = empty_samples(mdp, per_pair_count);
    const int period = thinning_period(t_mix, p_min);
    out.thinning_period = period;

    long long budget = options.max_steps;
    if (budget <= 0) {
        const double steps = options.safety_factor * per_pair_count *
                             min_explore_samples(t_mix, p_min, mdp.num_states(),
                                                 mdp.num_actions(), delta_second);
        if (!(steps < 9.0e18)) throw InvalidArgument("sampler step budget overflows");
        budget = std::max<long long>(1, static_cast<long long>(std::ceil(steps)));
    }

    const std::size_t A = mdp.num_actions();
    std::vector<std::vector<double>> rows(mdp.num_states());
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        for (std::size_t a = 0; a < A; ++a) rows[s].push_back(explore(s, a));

    Rng rng(seed);
    std::size_t open = out.buckets.size();
    auto state = rng.categorical({mdp.initial().data(), mdp.num_states()});
    long long t = 0;
    while (open > 0) {
        if (t >= budget)
            throw CoverageError("exploratory rollout left " + std::to_string(open) +
                                    " state-action buckets short after " + std::to_string(t) +
                                    " steps",
                                t);
        const std::size_t action = rng.categorical(rows[state]);
        const std::size_t next = rng.categorical(mdp.transition(state, action));
        if (t >= period && t % period == 0) {
            auto& b = out.buckets[state * A + action];
            if (b.size() < static_cast<std::size_t>(per_pair_count)) {
                b.push_back(static_cast<int>(next));
                if (b.size() == static_cast<std::size_t>(per_pair_count)) --open;
            }
        }
        state = next;
        ++t;
    }
    out.raw_steps = t;
    return out;
}

ParallelSamples ideal_parallel_samples(const TabularMdp& mdp, int per_pair_count,
                                       std::uint64_t seed) {
    ParallelSamples out = empty_samples(mdp, per_pair_count);
    Rng rng(seed);
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            auto& b = out.buckets[s * mdp.num_actions() + a];
            for (int k = 0; k < per_pair_count; ++k)
                b.push_back(static_cast<int>(rng.categorical(mdp.transition(s, a))));
        }
    return out;
}

ParallelSamples buckets_from_dataset(const TransitionDataset& data, int per_pair_count,
                                     int thinning) {
    if (per_pair_count < 1) throw InvalidArgument("per_pair_count must be at least 1");
    if (thinning < 1) throw InvalidArgument("thinning must be at least 1");
    ParallelSamples out;
    out.num_states = data.num_states;
    out.num_actions = data.num_actions;
    out.per_pair_count = per_pair_count;
    out.thinning_period = thinning;
    out.raw_steps = static_cast<long long>(data.size());
    out.buckets.resize(data.num_states * data.num_actions);
    for (std::size_t i = 0; i < data.size(); i += static_cast<std::size_t>(thinning)) {
        const auto& r = data.records[i];
        auto& b = out.buckets[static_cast<std::size_t>(r.state) * data.num_actions +
                              static_cast<std::size_t>(r.action)];
        if (b.size() < static_cast<std::size_t>(per_pair_count)) b.push_back(r.next_state);
    }
    std::size_t short_buckets = 0;
    for (const auto& b : out.buckets)
        if (b.size() < static_cast<std::size_t>(per_pair_count)) ++short_buckets;
    if (short_buckets > 0)
        throw CoverageError("dataset leaves " + std::to_string(short_buckets) +
                                " state-action buckets with fewer than " +
                                std::to_string(per_pair_count) + " samples",
                            out.raw_steps);
    return out;
}

}  // namespace ilbrl

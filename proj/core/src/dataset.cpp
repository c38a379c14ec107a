#include "ilbrl/dataset.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ilbrl {

std::string_view to_string(Source source) {
    switch (source) {
        case Source::Expert: return "expert";
        case Source::Exploratory: return "exploratory";
        case Source::Mixed: return "mixed";
    }
    return "unknown";
}

Source parse_source(std::string_view name) {
    if (name == "expert") return Source::Expert;
    if (name == "exploratory") return Source::Exploratory;
    if (name == "mixed") return Source::Mixed;
    throw ParseError("unknown source label '" + std::string(name) + "'");
}

void TransitionDataset::validate() const {
    const auto in_states = [&](int s) { return s >= 0 && static_cast<std::size_t>(s) < num_states; };
    const auto in_actions = [&](int a) { return a >= 0 && static_cast<std::size_t>(a) < num_actions; };
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!in_states(r.state) || !in_states(r.next_state) || !in_actions(r.action) ||
            (r.next_action && !in_actions(*r.next_action)))
            throw ModelError("record " + std::to_string(i) + " has an out-of-range index");
        if (r.step < 0) throw ModelError("record " + std::to_string(i) + " has a negative step");
        if (i + 1 < records.size() && records[i + 1].episode == r.episode) {
            const auto& next = records[i + 1];
            if (next.step != r.step + 1 || next.state != r.next_state)
                throw ModelError("records " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                 " break episode continuity");
            if (!r.next_action || *r.next_action != next.action)
                throw ModelError("record " + std::to_string(i) +
                                 " is missing the action taken at its successor");
        }
    }
}

namespace {

template <typename ActionSampler>
TransitionDataset rollout_impl(const TabularMdp& mdp, int num_steps, std::uint64_t seed,
                               const RolloutOptions& options, ActionSampler&& pick) {
    if (num_steps < 1) throw InvalidArgument("rollout: num_steps must be at least 1");
    if (options.horizon < 0) throw InvalidArgument("rollout: horizon must be non-negative");
    Rng rng(seed);
    TransitionDataset out;
    out.num_states = mdp.num_states();
    out.num_actions = mdp.num_actions();
    out.source = options.source;
    out.records.reserve(static_cast<std::size_t>(num_steps));

    const std::span<const double> p0(mdp.initial().data(), mdp.num_states());
    int episode = 0;
    int step = 0;
    auto state = static_cast<int>(rng.categorical(p0));
    for (int k = 0; k < num_steps; ++k) {
        const int action = pick(rng, state);
        if (!out.records.empty() && out.records.back().episode == episode)
            out.records.back().next_action = action;
        TransitionRecord rec;
        rec.episode = episode;
        rec.step = step;
        rec.state = state;
        rec.action = action;
        rec.reward = mdp.reward(static_cast<std::size_t>(state), static_cast<std::size_t>(action));
        rec.next_state = static_cast<int>(rng.categorical(
            mdp.transition(static_cast<std::size_t>(state), static_cast<std::size_t>(action))));
        rec.source = options.source;
        ++step;
        if (options.horizon > 0 && step == options.horizon) {
            rec.timeout = true;
            ++episode;
            step = 0;
            state = static_cast<int>(rng.categorical(p0));
        } else {
            state = rec.next_state;
        }
        out.records.push_back(rec);
    }
    return out;
}

}  // namespace

TransitionDataset rollout(const TabularMdp& mdp, const DeterministicPolicy& policy, int num_steps,
                          std::uint64_t seed, const RolloutOptions& options) {
    policy.validate(mdp.num_states(), mdp.num_actions());
    return rollout_impl(mdp, num_steps, seed, options,
                        [&](Rng&, int s) { return policy(static_cast<std::size_t>(s)); });
}

TransitionDataset rollout(const TabularMdp& mdp, const StochasticPolicy& policy, int num_steps,
                          std::uint64_t seed, const RolloutOptions& options) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw ModelError("stochastic policy dimensions do not match the MDP");
    std::vector<std::vector<double>> rows(mdp.num_states());
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) rows[s].push_back(policy(s, a));
    return rollout_impl(mdp, num_steps, seed, options, [&](Rng& rng, int s) {
        return static_cast<int>(rng.categorical(rows[static_cast<std::size_t>(s)]));
    });
}

TransitionDataset merge(const TransitionDataset& expert, const TransitionDataset& exploratory) {
    if (expert.num_states != exploratory.num_states || expert.num_actions != exploratory.num_actions) {
        // An empty dataset with unset dimensions adopts the other's.
        const bool expert_blank = expert.empty() && expert.num_states == 0;
        const bool explore_blank = exploratory.empty() && exploratory.num_states == 0;
        if (!expert_blank && !explore_blank)
            throw InvalidArgument("merge: datasets describe MDPs of different dimensions");
    }
    TransitionDataset out;
    out.num_states = std::max(expert.num_states, exploratory.num_states);
    out.num_actions = std::max(expert.num_actions, exploratory.num_actions);
    if (expert.empty())
        out.source = exploratory.source;
    else if (exploratory.empty())
        out.source = expert.source;
    else
        out.source = expert.source == exploratory.source ? expert.source : Source::Mixed;
    out.records = expert.records;
    int offset = 0;
    for (const auto& r : expert.records) offset = std::max(offset, r.episode + 1);
    out.records.reserve(expert.size() + exploratory.size());
    for (auto r : exploratory.records) {
        r.episode += offset;
        out.records.push_back(r);
    }
    return out;
}

TransitionDataset shuffle_episodes(const TransitionDataset& data, std::uint64_t seed) {
    // Group contiguous runs of one episode id.
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        if (i == 0 || data.records[i].episode != data.records[i - 1].episode)
            runs.emplace_back(i, i);
        runs.back().second = i + 1;
    }
    Rng rng(seed);
    for (std::size_t i = runs.size(); i > 1; --i) std::swap(runs[i - 1], runs[rng.below(i)]);
    TransitionDataset out = data;
    out.records.clear();
    for (const auto& [begin, end] : runs)
        out.records.insert(out.records.end(), data.records.begin() + static_cast<std::ptrdiff_t>(begin),
                           data.records.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

TransitionDataset filter_source(const TransitionDataset& data, Source source) {
    TransitionDataset out{data.num_states, data.num_actions, source, {}};
    std::copy_if(data.records.begin(), data.records.end(), std::back_inserter(out.records),
                 [&](const TransitionRecord& r) { return r.source == source; });
    return out;
}

TransitionDataset initial_records(const TransitionDataset& data) {
    TransitionDataset out{data.num_states, data.num_actions, data.source, {}};
    std::copy_if(data.records.begin(), data.records.end(), std::back_inserter(out.records),
                 [](const TransitionRecord& r) { return r.is_initial(); });
    return out;
}

DatasetSplit split_dataset(const TransitionDataset& data, double train_fraction,
                           double ope_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0) || !(ope_fraction > 0.0 && ope_fraction < 1.0))
        throw InvalidArgument("split_dataset: fractions must lie strictly between 0 and 1");
    const auto slice = [&](std::size_t begin, std::size_t end) {
        TransitionDataset part{data.num_states, data.num_actions, data.source, {}};
        part.records.assign(data.records.begin() + static_cast<std::ptrdiff_t>(begin),
                            data.records.begin() + static_cast<std::ptrdiff_t>(end));
        return part;
    };
    const std::size_t n = data.size();
    const auto i = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
    const std::size_t validation_size = n - i;
    const auto l = static_cast<std::size_t>(ope_fraction * static_cast<double>(validation_size));
    DatasetSplit out;
    out.train = slice(0, i);
    out.evaluation_train = slice(i, i + l);
    out.final_validation = initial_records(slice(i + l, n));
    if (out.train.empty()) throw InvalidArgument("split_dataset: training split is empty");
    if (out.evaluation_train.empty())
        throw InvalidArgument("split_dataset: policy-evaluation training split is empty");
    if (out.final_validation.empty())
        throw InvalidArgument("split_dataset: final validation split has no initial-state records");
    return out;
}

TransitionDataset compose_mixture(const TransitionDataset& data, double expert_fraction,
                                  std::uint64_t seed) {
    if (!(expert_fraction >= 0.0 && expert_fraction <= 1.0))
        throw InvalidArgument("compose_mixture: expert fraction must lie in [0, 1]");
    std::vector<std::size_t> expert_idx;
    std::vector<std::size_t> explore_idx;
    for (std::size_t i = 0; i < data.records.size(); ++i)
        (data.records[i].source == Source::Expert ? expert_idx : explore_idx).push_back(i);
    const std::size_t n = data.size();
    const auto n_expert =
        static_cast<std::size_t>(std::llround(expert_fraction * static_cast<double>(n)));
    if ((n_expert > 0 && expert_idx.empty()) || (n_expert < n && explore_idx.empty()))
        throw InvalidArgument("compose_mixture: requested mix needs records from an empty pool");
    Rng rng(seed);
    TransitionDataset out{data.num_states, data.num_actions, Source::Mixed, {}};
    out.records.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& pool = k < n_expert ? expert_idx : explore_idx;
        TransitionRecord r = data.records[pool[rng.below(pool.size())]];
        // Resampled records are independent; give each its own episode id.
        r.episode = static_cast<int>(k);
        out.records.push_back(r);
    }
    return out;
}

}  // namespace ilbrl

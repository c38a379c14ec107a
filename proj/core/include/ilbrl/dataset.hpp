#pragma once

#include "ilbrl/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ilbrl {

enum class Source { Expert, Exploratory, Mixed };

std::string_view to_string(Source source);
Source parse_source(std::string_view name);

/// One logged transition. `next_action` is the action actually taken at
/// `next_state` and is present whenever the record has a successor in its
/// episode.
struct TransitionRecord {
    int episode = 0;
    int step = 0;
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    std::optional<int> next_action;
    bool terminal = false;
    bool timeout = false;
    Source source = Source::Exploratory;

    bool is_initial() const noexcept { return step == 0; }
    bool operator==(const TransitionRecord&) const = default;
};

/// Ordered transition log over an S x A MDP.
struct TransitionDataset {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    Source source = Source::Exploratory;
    std::vector<TransitionRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }

    /// Throws ModelError if any index is out of range or the episode/step
    /// ordering or next-action bookkeeping is inconsistent.
    void validate() const;

    bool operator==(const TransitionDataset&) const = default;
};

struct RolloutOptions {
    /// Episodes are cut after this many steps (timeout flag set) and restart
    /// from the initial distribution; 0 means a single episode.
    int horizon = 0;
    Source source = Source::Exploratory;
};

/// Samples num_steps transitions from P0 and P under `policy`. Identical
/// seeds give bit-identical datasets.
TransitionDataset rollout(const TabularMdp& mdp, const DeterministicPolicy& policy, int num_steps,
                          std::uint64_t seed, const RolloutOptions& options = {});
TransitionDataset rollout(const TabularMdp& mdp, const StochasticPolicy& policy, int num_steps,
                          std::uint64_t seed, const RolloutOptions& options = {});

/// D_U = D_E followed by D_X. Episode ids of the second dataset are shifted
/// past those of the first; per-record source labels are kept.
TransitionDataset merge(const TransitionDataset& expert, const TransitionDataset& exploratory);

/// Reorders whole episodes with a seeded permutation; records keep their
/// flags and within-episode order.
TransitionDataset shuffle_episodes(const TransitionDataset& data, std::uint64_t seed);

/// Records of `data` restricted to one source label.
TransitionDataset filter_source(const TransitionDataset& data, Source source);

/// Records with step == 0.
TransitionDataset initial_records(const TransitionDataset& data);

struct DatasetSplit {
    TransitionDataset train;              ///< D_T = D[0 : i)
    TransitionDataset evaluation_train;   ///< D_V_PE = D_V[0 : l)
    TransitionDataset final_validation;   ///< D_V_F = initial records of D_V[l : |D_V|)
};

/// Offline-tuning data split: i = int(train_fraction |D|), D_V = D[i:],
/// l = int(ope_fraction |D_V|). Throws InvalidArgument for fractions
/// outside (0, 1) or if any part comes out empty.
DatasetSplit split_dataset(const TransitionDataset& data, double train_fraction,
                           double ope_fraction);

/// Resamples `data` (with replacement, same size) so that a fraction
/// `expert_fraction` of the records comes from expert-labelled records and
/// the rest from exploratory ones. Throws InvalidArgument if a required
/// pool is empty.
TransitionDataset compose_mixture(const TransitionDataset& data, double expert_fraction,
                                  std::uint64_t seed);

}  // namespace ilbrl

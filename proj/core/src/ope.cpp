#include "ilbrl/ope.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/parallel.hpp"
#include "ilbrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ilbrl {

void OpeConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("ope.learning_rate must be positive");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("ope.tau must lie in (0, 1]");
    if (expert_data_fraction && !(*expert_data_fraction >= 0.0 && *expert_data_fraction <= 1.0))
        throw InvalidArgument("ope.expert_data_fraction must lie in [0, 1]");
    if (passes < 1) throw InvalidArgument("ope.passes must be at least 1");
    if (divergence_threshold && !(*divergence_threshold > 0.0))
        throw InvalidArgument("ope.divergence_threshold must be positive");
    if (!(discount >= 0.0 && discount < 1.0)) throw InvalidArgument("ope.discount must lie in [0, 1)");
    if (!(lr_decay >= 0.0)) throw InvalidArgument("ope.lr_decay must be non-negative");
    if (batch_size < 1) throw InvalidArgument("ope.batch_size must be at least 1");
    if (!(convergence_tol > 0.0)) throw InvalidArgument("ope.convergence_tol must be positive");
}

OpeResult esarsa_evaluate(const TransitionDataset& data, const DeterministicPolicy& policy,
                          const OpeConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    policy.validate(data.num_states, data.num_actions);
    const auto S = static_cast<Eigen::Index>(data.num_states);
    const auto A = static_cast<Eigen::Index>(data.num_actions);

    double threshold = 0.0;
    if (cfg.divergence_threshold) {
        threshold = *cfg.divergence_threshold;
    } else {
        double scale = 0.0;
        for (const auto& r : data.records) scale = std::max(scale, std::abs(r.reward));
        threshold = 10.0 * (scale > 0.0 ? scale : 1.0) / (1.0 - cfg.discount);
    }

    OpeResult out;
    out.seed = seed;
    Matrix q[2] = {Matrix::Zero(S, A), Matrix::Zero(S, A)};
    Matrix target[2] = {Matrix::Zero(S, A), Matrix::Zero(S, A)};
    Matrix delta = Matrix::Zero(S, A);
    std::vector<Eigen::Index> touched;

    const std::size_t n = data.size();
    std::vector<std::size_t> order[2];
    Rng rng[2] = {Rng(derive_seed(seed, "esarsa", {0})), Rng(derive_seed(seed, "esarsa", {1}))};
    for (auto& o : order) {
        o.resize(n);
        std::iota(o.begin(), o.end(), std::size_t{0});
    }

    Matrix previous = Matrix::Zero(S, A);
    int last_moving_pass = 0;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for (int pass = 0; pass < cfg.passes && !out.diverged; ++pass) {
        const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * pass);
        for (int j = 0; j < 2; ++j)
            for (std::size_t i = n; i > 1; --i) std::swap(order[j][i - 1], order[j][rng[j].below(i)]);

        for (std::size_t begin = 0; begin < n && !out.diverged; begin += batch) {
            const std::size_t end = std::min(n, begin + batch);
            for (int j = 0; j < 2; ++j) {
                touched.clear();
                for (std::size_t k = begin; k < end; ++k) {
                    const auto& r = data.records[order[j][k]];
                    double y = r.reward;
                    if (!r.terminal) {
                        const int a_next = policy(static_cast<std::size_t>(r.next_state));
                        y += cfg.discount * 0.5 *
                             (target[0](r.next_state, a_next) + target[1](r.next_state, a_next));
                    }
                    if (delta(r.state, r.action) == 0.0) touched.push_back(r.state * A + r.action);
                    delta(r.state, r.action) += y - q[j](r.state, r.action);
                }
                for (const auto idx : touched) {
                    const Eigen::Index s = idx / A;
                    const Eigen::Index a = idx % A;
                    double& cell = q[j](s, a);
                    cell += lr * delta(s, a);
                    delta(s, a) = 0.0;
                    if (!std::isfinite(cell) || std::abs(cell) > threshold) out.diverged = true;
                }
            }
            for (int j = 0; j < 2; ++j) target[j] = (1.0 - cfg.tau) * target[j] + cfg.tau * q[j];
        }
        const Matrix mean = 0.5 * (q[0] + q[1]);
        if (!((mean - previous).cwiseAbs().maxCoeff() < cfg.convergence_tol))
            last_moving_pass = pass + 1;
        previous = mean;
    }
    out.value.q = 0.5 * (q[0] + q[1]);
    out.converged_pass = out.diverged ? cfg.passes + 1 : last_moving_pass + 1;
    return out;
}

double initial_state_value(const ValueTable& value, const DeterministicPolicy& policy,
                           const TransitionDataset& held_out) {
    if (held_out.empty()) throw InvalidArgument("held-out set is empty");
    double sum = 0.0;
    for (const auto& r : held_out.records)
        sum += value.q(r.state, policy(static_cast<std::size_t>(r.state)));
    return sum / static_cast<double>(held_out.size());
}

double true_initial_value(const TabularMdp& mdp, const DeterministicPolicy& policy,
                          const TransitionDataset& held_out, double discount) {
    if (held_out.empty()) throw InvalidArgument("held-out set is empty");
    const Vector v = policy_value_discounted(mdp.with_discount(discount), policy).values(policy);
    double sum = 0.0;
    for (const auto& r : held_out.records) sum += v(r.state);
    return sum / static_cast<double>(held_out.size());
}

double sampled_initial_value(const TabularMdp& mdp, const DeterministicPolicy& policy,
                             const TransitionDataset& held_out, double discount, int episodes,
                             int horizon, std::uint64_t seed) {
    if (held_out.empty()) throw InvalidArgument("held-out set is empty");
    if (episodes < 1 || horizon < 1) throw InvalidArgument("episodes and horizon must be positive");
    policy.validate(mdp.num_states(), mdp.num_actions());
    Rng rng(seed);
    double total = 0.0;
    for (const auto& start : held_out.records) {
        for (int e = 0; e < episodes; ++e) {
            auto s = static_cast<std::size_t>(start.state);
            double g = 0.0;
            double scale = 1.0;
            for (int t = 0; t < horizon; ++t) {
                const auto a = static_cast<std::size_t>(policy(s));
                g += scale * mdp.reward(s, a);
                scale *= discount;
                s = rng.categorical(mdp.transition(s, a));
            }
            total += g;
        }
    }
    return total / (static_cast<double>(held_out.size()) * episodes);
}

namespace {

// Indices sorted by value, highest first, ties to the lower index.
std::vector<std::size_t> descending(std::span<const double> values,
                                    std::vector<std::size_t> indices) {
    std::stable_sort(indices.begin(), indices.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return indices;
}

}  // namespace

RankErrorResult rank_error(std::span<const PolicyEstimate> learned, std::span<const double> truths) {
    const std::size_t K = learned.size();
    if (K < 2) throw InvalidArgument("rank_error needs at least two policies");
    if (truths.size() != K) throw InvalidArgument("rank_error: learned and true lists differ in length");

    std::vector<std::size_t> all(K);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<int> true_rank(K);
    {
        const auto order = descending(truths, all);
        for (std::size_t r = 0; r < K; ++r) true_rank[order[r]] = static_cast<int>(r) + 1;
    }

    std::vector<double> values(K);
    std::vector<std::size_t> live;
    RankErrorResult out;
    for (std::size_t k = 0; k < K; ++k) {
        values[k] = learned[k].value;
        if (learned[k].diverged) {
            out.error += static_cast<int>(K);
        } else {
            live.push_back(k);
            out.distance += std::abs(learned[k].value - truths[k]);
        }
    }
    const auto order = descending(values, live);

    // best[i][r]: minimal cost placing the first i live entries on ranks
    // drawn increasingly from 1..r.
    const std::size_t L = order.size();
    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::vector<std::vector<int>> best(L + 1, std::vector<int>(K + 1, kInf));
    for (std::size_t r = 0; r <= K; ++r) best[0][r] = 0;
    for (std::size_t i = 1; i <= L; ++i)
        for (std::size_t r = i; r <= K; ++r) {
            const int place = best[i - 1][r - 1] + std::abs(static_cast<int>(r) - true_rank[order[i - 1]]);
            best[i][r] = std::min(best[i][r - 1], place);
        }
    out.error += best[L][K];
    return out;
}

namespace {

TransitionDataset evaluation_data(const TransitionDataset& d_pe, const OpeConfig& cfg,
                                  std::uint64_t eval_seed) {
    if (!cfg.expert_data_fraction) return d_pe;
    return compose_mixture(d_pe, *cfg.expert_data_fraction, derive_seed(eval_seed, "mixture"));
}

}  // namespace

TuneResult tune_ope(const TransitionDataset& d_pe, const TransitionDataset& d_f,
                    std::span<const KnownPolicy> known, std::span<const OpeConfig> grid,
                    std::span<const std::uint64_t> eval_seeds, std::size_t workers) {
    if (known.size() < 2) throw InvalidArgument("tune_ope needs at least two known policies");
    if (grid.empty()) throw InvalidArgument("tune_ope needs a non-empty config grid");
    if (eval_seeds.empty()) throw InvalidArgument("tune_ope needs at least one eval seed");
    for (const auto& cfg : grid) cfg.validate();

    const std::size_t P = known.size();
    const std::size_t E = eval_seeds.size();
    struct Cell {
        double value = 0.0;
        bool diverged = false;
        int converged_pass = 0;
    };
    std::vector<Cell> cells(grid.size() * P * E);
    parallel_for(cells.size(), workers, [&](std::size_t idx) {
        const std::size_t c = idx / (P * E);
        const std::size_t k = (idx / E) % P;
        const std::uint64_t e = eval_seeds[idx % E];
        const auto data = evaluation_data(d_pe, grid[c], e);
        const auto res = esarsa_evaluate(data, known[k].policy, grid[c], e);
        cells[idx] = {res.diverged ? 0.0 : initial_state_value(res.value, known[k].policy, d_f),
                      res.diverged, res.converged_pass};
    });

    std::vector<double> truths;
    for (const auto& kp : known) truths.push_back(kp.true_value);

    TuneResult out;
    bool found = false;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        ConfigScore score;
        score.all_diverged = true;
        for (std::size_t k = 0; k < P; ++k) {
            double sum = 0.0;
            int live = 0;
            for (std::size_t e = 0; e < E; ++e) {
                const Cell& cell = cells[(c * P + k) * E + e];
                if (cell.diverged) continue;
                sum += cell.value;
                ++live;
                score.max_converged_pass = std::max(score.max_converged_pass, cell.converged_pass);
            }
            score.estimates.push_back({live > 0 ? sum / live : 0.0, live == 0});
            if (live > 0) score.all_diverged = false;
        }
        score.rank = rank_error(score.estimates, truths);
        if (!score.all_diverged) {
            const auto& incumbent = out.scores.empty() ? score : out.scores[out.best];
            if (!found || score.rank.error < incumbent.rank.error ||
                (score.rank.error == incumbent.rank.error &&
                 score.rank.distance < incumbent.rank.distance)) {
                out.best = c;
                found = true;
            }
        }
        out.scores.push_back(std::move(score));
    }
    if (!found) throw Error("tune_ope: every config diverged on every known policy");
    out.config = grid[out.best];
    out.config.passes = std::clamp(out.scores[out.best].max_converged_pass, 1, grid[out.best].passes);
    return out;
}

SelectionResult select_policy(const std::vector<std::vector<DeterministicPolicy>>& candidates,
                              const TransitionDataset& d_pe, const TransitionDataset& d_f,
                              const OpeConfig& config, std::span<const std::uint64_t> eval_seeds,
                              std::size_t workers) {
    if (candidates.empty()) throw InvalidArgument("select_policy needs at least one candidate");
    if (eval_seeds.empty()) throw InvalidArgument("select_policy needs at least one eval seed");
    config.validate();
    SelectionResult out;
    for (std::size_t n = 0; n < candidates.size(); ++n)
        for (std::size_t s = 0; s < candidates[n].size(); ++s)
            for (const auto e : eval_seeds) out.cells.push_back({n, s, e, 0.0, false});
    parallel_for(out.cells.size(), workers, [&](std::size_t i) {
        auto& cell = out.cells[i];
        const auto& policy = candidates[cell.hyperparam][cell.policy_index];
        const auto res = esarsa_evaluate(evaluation_data(d_pe, config, cell.eval_seed), policy,
                                         config, cell.eval_seed);
        cell.diverged = res.diverged;
        if (!res.diverged) cell.value = initial_state_value(res.value, policy, d_f);
    });

    std::vector<double> sum(candidates.size(), 0.0);
    std::vector<int> live(candidates.size(), 0);
    for (const auto& cell : out.cells)
        if (!cell.diverged) {
            sum[cell.hyperparam] += cell.value;
            ++live[cell.hyperparam];
        }
    bool found = false;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
        if (live[n] == 0) {
            out.scores.emplace_back();
            continue;
        }
        out.scores.emplace_back(sum[n] / live[n]);
        if (!found || *out.scores[n] > *out.scores[out.best]) {
            out.best = n;
            found = true;
        }
    }
    if (!found) throw Error("select_policy: no candidate has a convergent evaluation");
    return out;
}

ProtocolResult run_protocol(const TransitionDataset& data,
                            std::span<const DeterministicPolicy> known, const TruthFn& truth,
                            const TrainFn& train, const ProtocolOptions& options) {
    if (options.hyperparams < 1 || options.policy_seeds.empty())
        throw InvalidArgument("protocol needs at least one hyperparameter and one policy seed");
    ProtocolResult out;
    out.split = split_dataset(data, options.train_fraction, options.ope_fraction);

    std::vector<KnownPolicy> labelled;
    for (const auto& p : known) labelled.push_back({p, truth(p, out.split.final_validation)});
    out.tuning = tune_ope(out.split.evaluation_train, out.split.final_validation, labelled,
                          options.grid, options.eval_seeds, options.workers);

    out.candidates.assign(options.hyperparams,
                          std::vector<DeterministicPolicy>(options.policy_seeds.size()));
    parallel_for(options.hyperparams * options.policy_seeds.size(), options.workers,
                 [&](std::size_t i) {
                     const std::size_t n = i / options.policy_seeds.size();
                     const std::size_t s = i % options.policy_seeds.size();
                     out.candidates[n][s] = train(out.split.train, n, options.policy_seeds[s]);
                 });
    out.selection = select_policy(out.candidates, out.split.evaluation_train,
                                  out.split.final_validation, out.tuning.config,
                                  options.eval_seeds, options.workers);
    return out;
}

}  // namespace ilbrl

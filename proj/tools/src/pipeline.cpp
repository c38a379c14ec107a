#include "ilbrl_cli/pipeline.hpp"

#include "ilbrl/dataset_io.hpp"
#include "ilbrl/generators.hpp"
#include "ilbrl/ilbrl.hpp"
#include "ilbrl/mdp_io.hpp"
#include "ilbrl/parallel.hpp"
#include "ilbrl/random.hpp"
#include "ilbrl/stats.hpp"
#include "ilbrl/text.hpp"
#include "ilbrl/version.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>

namespace ilbrl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json provenance(const RunContext& ctx, const std::string& stage) {
    return json{{"config_hash", ctx.config.hash},
                {"seed", ctx.seed},
                {"version", std::string(kVersion)},
                {"stage", stage}};
}

std::map<std::string, std::string> provenance_pairs(const RunContext& ctx) {
    return {{"config_hash", ctx.config.hash},
            {"seed", std::to_string(ctx.seed)},
            {"version", std::string(kVersion)}};
}

std::string csv_header(const RunContext& ctx) {
    return "# config_hash=" + ctx.config.hash + " seed=" + std::to_string(ctx.seed) +
           " version=" + std::string(kVersion) + "\n";
}

void write_json(const fs::path& path, const json& value) {
    text::write_file(path.string(), value.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    if (!fs::exists(path))
        throw Error("missing artifact " + path.string() + "; run the stage that produces it first");
    try {
        return json::parse(text::read_file(path.string()));
    } catch (const json::exception& e) {
        throw ParseError("cannot parse " + path.string() + ": " + e.what());
    }
}

TransitionDataset read_dataset(const fs::path& path) {
    if (!fs::exists(path))
        throw Error("missing artifact " + path.string() + "; run the stage that produces it first");
    return load_dataset(path.string());
}

TabularMdp read_mdp(const RunContext& ctx) {
    const auto path = ctx.out / "mdp.txt";
    if (!fs::exists(path))
        throw Error("missing artifact " + path.string() + "; run generate-data first");
    return load_mdp(path.string());
}

json policy_json(const DeterministicPolicy& p) { return p.actions(); }

DeterministicPolicy policy_from_json(const json& j) {
    return DeterministicPolicy(j.get<std::vector<int>>());
}

DeterministicPolicy expert_policy(const RunContext& ctx) {
    return policy_from_json(read_json(ctx.out / "manifest.json").at("expert_policy"));
}

Matrix reward_table(const RunContext& ctx) {
    const auto j = read_json(ctx.out / "intrinsic_reward.json").at("table");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.at(0).size()));
    for (Eigen::Index s = 0; s < m.rows(); ++s)
        for (Eigen::Index a = 0; a < m.cols(); ++a)
            m(s, a) = j.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a)).get<double>();
    return m;
}

DatasetSplit labelled_split(const RunContext& ctx) {
    return split_dataset(read_dataset(ctx.out / "labelled.tsv"), ctx.config.data.train_fraction,
                         ctx.config.data.ope_fraction);
}

std::vector<std::uint64_t> eval_seeds(const RunContext& ctx) {
    std::vector<std::uint64_t> out;
    for (int e = 0; e < ctx.config.ope.eval_seeds; ++e)
        out.push_back(derive_seed(ctx.seed, "ope-eval", {static_cast<std::uint64_t>(e)}));
    return out;
}

json ope_config_json(const OpeConfig& c) {
    json j{{"learning_rate", c.learning_rate}, {"tau", c.tau}};
    j["expert_data_fraction"] = c.expert_data_fraction ? json(*c.expert_data_fraction) : json(nullptr);
    j["passes"] = c.passes;
    j["lr_decay"] = c.lr_decay;
    j["batch_size"] = c.batch_size;
    j["discount"] = c.discount;
    return j;
}

json estimate_json(const PolicyEstimate& e) {
    return json{{"value", e.diverged ? json(nullptr) : json(e.value)}, {"diverged", e.diverged}};
}

void generate_data(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    const TabularMdp mdp = [&] {
        if (!cfg.mdp.file.empty()) return load_mdp(cfg.mdp.file);
        Rng rng(derive_seed(ctx.seed, "mdp"));
        return random_mdp(rng, cfg.mdp.family);
    }();
    const auto expert = greedy_policy(value_iteration(mdp, 1e-10, 1000000));
    const auto d_e = rollout(mdp, expert, cfg.data.expert_steps, derive_seed(ctx.seed, "expert-data"),
                             {cfg.data.horizon, Source::Expert});
    const auto d_x = rollout(mdp, StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions()),
                             cfg.data.explore_steps, derive_seed(ctx.seed, "explore-data"),
                             {cfg.data.horizon, Source::Exploratory});
    const auto d_u = shuffle_episodes(merge(d_e, d_x), derive_seed(ctx.seed, "shuffle"));

    fs::create_directories(ctx.out);
    text::write_file((ctx.out / "mdp.txt").string(), csv_header(ctx) + format_mdp(mdp));
    const auto prov = provenance_pairs(ctx);
    save_dataset(d_e, (ctx.out / "expert.tsv").string(), prov);
    save_dataset(d_x, (ctx.out / "exploratory.tsv").string(), prov);
    save_dataset(d_u, (ctx.out / "unified.tsv").string(), prov);
    write_json(ctx.out / "manifest.json",
               json{{"provenance", provenance(ctx, "generate-data")},
                    {"states", mdp.num_states()},
                    {"actions", mdp.num_actions()},
                    {"expert_records", d_e.size()},
                    {"exploratory_records", d_x.size()},
                    {"expert_policy", policy_json(expert)}});
}

void label_rewards(const RunContext& ctx) {
    const auto d_e = read_dataset(ctx.out / "expert.tsv");
    auto d_u = read_dataset(ctx.out / "unified.tsv");
    const auto reward = intrinsic_reward(d_e, d_u.num_states, d_u.num_actions);
    for (auto& r : d_u.records)
        r.reward = reward.table(r.state, r.action);
    save_dataset(d_u, (ctx.out / "labelled.tsv").string(), provenance_pairs(ctx));
    json table = json::array();
    for (Eigen::Index s = 0; s < reward.table.rows(); ++s) {
        json row = json::array();
        for (Eigen::Index a = 0; a < reward.table.cols(); ++a) row.push_back(reward.table(s, a));
        table.push_back(row);
    }
    write_json(ctx.out / "intrinsic_reward.json",
               json{{"provenance", provenance(ctx, "label-rewards")},
                    {"support_size", reward.table.sum()},
                    {"table", table}});
}

void train(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto split = labelled_split(ctx);
    const Matrix reward = reward_table(ctx);
    const std::size_t hyper = cfg.solver.gammas.size();
    const auto seeds = static_cast<std::size_t>(cfg.selection.policy_seeds);
    std::vector<DeterministicPolicy> policies(hyper * seeds);
    std::optional<TabularMdp> mdp;
    if (cfg.solver.kind == "exact") mdp = read_mdp(ctx);
    parallel_for(hyper * seeds, ctx.workers, [&](std::size_t i) {
        const std::size_t n = i / seeds;
        const std::size_t s = i % seeds;
        const double gamma = cfg.solver.gammas[n];
        if (mdp) {
            policies[i] = exact_solver(*mdp, gamma)(split.train, reward);
            return;
        }
        // The seed reorders episodes, which changes which successors fill
        // each phase's buckets.
        const auto data = shuffle_episodes(split.train, derive_seed(ctx.seed, "train", {n, s}));
        policies[i] = phased_q_solver({gamma, cfg.solver.ell, cfg.solver.m, cfg.solver.thinning})(
            data, reward);
    });

    fs::create_directories(ctx.out / "cells");
    json candidates = json::array();
    for (std::size_t n = 0; n < hyper; ++n) {
        json row = json::array();
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto& p = policies[n * seeds + s];
            write_json(ctx.out / "cells" / ("train_n" + std::to_string(n) + "_s" + std::to_string(s) + ".json"),
                       json{{"provenance", provenance(ctx, "train")},
                            {"hyperparam", n},
                            {"gamma", cfg.solver.gammas[n]},
                            {"policy_seed", s},
                            {"policy", policy_json(p)}});
            row.push_back(policy_json(p));
        }
        candidates.push_back(row);
    }
    write_json(ctx.out / "candidates.json",
               json{{"provenance", provenance(ctx, "train")},
                    {"gammas", cfg.solver.gammas},
                    {"train_records", split.train.size()},
                    {"candidates", candidates}});
}

void evaluate_offline(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto mdp = read_mdp(ctx);
    const auto labelled_mdp = mdp.with_rewards(reward_table(ctx));
    const auto split = labelled_split(ctx);

    std::vector<KnownPolicy> known;
    const auto expert = expert_policy(ctx);
    known.push_back({expert, true_initial_value(labelled_mdp, expert, split.final_validation,
                                                cfg.ope.discount)});
    for (int k = 0; k < cfg.ope.known_random_policies; ++k) {
        Rng rng(derive_seed(ctx.seed, "known-policy", {static_cast<std::uint64_t>(k)}));
        auto p = random_policy(rng, mdp.num_states(), mdp.num_actions());
        const double truth = true_initial_value(labelled_mdp, p, split.final_validation, cfg.ope.discount);
        known.push_back({std::move(p), truth});
    }
    const auto grid = cfg.ope.grid();
    const auto seeds = eval_seeds(ctx);
    const auto tuning = tune_ope(split.evaluation_train, split.final_validation, known, grid, seeds,
                                 ctx.workers);

    fs::create_directories(ctx.out / "cells");
    json scores = json::array();
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto& sc = tuning.scores[c];
        json estimates = json::array();
        for (const auto& e : sc.estimates) estimates.push_back(estimate_json(e));
        const json cell{{"provenance", provenance(ctx, "evaluate-offline")},
                        {"config_index", c},
                        {"config", ope_config_json(grid[c])},
                        {"rank_error", sc.rank.error},
                        {"distance", sc.rank.distance},
                        {"all_diverged", sc.all_diverged},
                        {"max_converged_pass", sc.max_converged_pass},
                        {"estimates", estimates}};
        write_json(ctx.out / "cells" / ("ope_c" + std::to_string(c) + ".json"), cell);
        scores.push_back(json{{"config_index", c}, {"rank_error", sc.rank.error}, {"distance", sc.rank.distance}});
    }
    json known_json = json::array();
    for (const auto& k : known)
        known_json.push_back(json{{"policy", policy_json(k.policy)}, {"true_value", k.true_value}});
    write_json(ctx.out / "tuning.json",
               json{{"provenance", provenance(ctx, "evaluate-offline")},
                    {"splits", json{{"train_fraction", cfg.data.train_fraction},
                                    {"ope_fraction", cfg.data.ope_fraction},
                                    {"train_records", split.train.size()},
                                    {"evaluation_train_records", split.evaluation_train.size()},
                                    {"final_validation_records", split.final_validation.size()}}},
                    {"eval_seeds", seeds},
                    {"grid", [&] {
                         json g = json::array();
                         for (const auto& c : grid) g.push_back(ope_config_json(c));
                         return g;
                     }()},
                    {"best", tuning.best},
                    {"config", ope_config_json(tuning.config)},
                    {"known_policies", known_json},
                    {"scores", scores}});
}

OpeConfig tuned_config(const RunContext& ctx) {
    const auto j = read_json(ctx.out / "tuning.json");
    const auto grid = ctx.config.ope.grid();
    const auto best = j.at("best").get<std::size_t>();
    if (best >= grid.size())
        throw Error("tuning.json does not match the [ope] grid of this config; rerun evaluate-offline");
    OpeConfig c = grid[best];
    c.passes = j.at("config").at("passes").get<int>();
    return c;
}

std::vector<std::vector<DeterministicPolicy>> read_candidates(const RunContext& ctx) {
    std::vector<std::vector<DeterministicPolicy>> out;
    const auto j = read_json(ctx.out / "candidates.json");
    for (const auto& row : j.at("candidates")) {
        out.emplace_back();
        for (const auto& p : row) out.back().push_back(policy_from_json(p));
    }
    return out;
}

void select(const RunContext& ctx) {
    const auto split = labelled_split(ctx);
    const auto candidates = read_candidates(ctx);
    const auto cfg = tuned_config(ctx);
    const auto seeds = eval_seeds(ctx);
    const auto result = select_policy(candidates, split.evaluation_train, split.final_validation, cfg,
                                      seeds, ctx.workers);

    fs::create_directories(ctx.out / "cells");
    json scores = json::array();
    for (std::size_t n = 0; n < result.scores.size(); ++n) {
        json cells = json::array();
        for (const auto& c : result.cells) {
            if (c.hyperparam != n) continue;
            cells.push_back(json{{"policy_index", c.policy_index},
                                 {"eval_seed", c.eval_seed},
                                 {"value", c.diverged ? json(nullptr) : json(c.value)},
                                 {"diverged", c.diverged}});
        }
        const json score = result.scores[n] ? json(*result.scores[n]) : json(nullptr);
        write_json(ctx.out / "cells" / ("select_n" + std::to_string(n) + ".json"),
                   json{{"provenance", provenance(ctx, "select")},
                        {"hyperparam", n},
                        {"score", score},
                        {"evaluations", cells}});
        scores.push_back(score);
    }
    write_json(ctx.out / "selection.json",
               json{{"provenance", provenance(ctx, "select")},
                    {"best", result.best},
                    {"ope_config", ope_config_json(cfg)},
                    {"scores", scores}});
}

void report(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto mdp = read_mdp(ctx);
    const auto candidates = read_candidates(ctx);
    const auto best = read_json(ctx.out / "selection.json").at("best").get<std::size_t>();
    if (best >= candidates.size()) throw Error("selection.json does not match candidates.json");
    const double j_expert = average_reward(mdp, expert_policy(ctx));
    const double j_random =
        average_reward(mdp, StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions()));

    std::vector<std::vector<double>> scores(candidates.size());
    std::vector<double> pooled;
    for (std::size_t n = 0; n < candidates.size(); ++n)
        for (const auto& p : candidates[n]) {
            scores[n].push_back(normalized_score(average_reward(mdp, p), j_random, j_expert));
            pooled.push_back(scores[n].back());
        }

    std::string summary = csv_header(ctx) + "hyperparam,gamma,runs,mean,ci_lo,ci_hi,iqm\n";
    for (std::size_t n = 0; n < scores.size(); ++n) {
        const Interval ci = scores[n].size() > 1 ? mean_normal_ci(scores[n], cfg.stats.level)
                                                 : Interval{scores[n][0], scores[n][0], scores[n][0]};
        const std::string gamma = n < cfg.solver.gammas.size() ? text::format_double(cfg.solver.gammas[n]) : "";
        summary += std::to_string(n) + "," + gamma + "," + std::to_string(scores[n].size()) + "," +
                   text::format_double(ci.point) + "," + text::format_double(ci.lo) + "," +
                   text::format_double(ci.hi) + "," + text::format_double(iqm(scores[n])) + "\n";
    }
    text::write_file((ctx.out / "summary.csv").string(), summary);

    const auto fractions = performance_profile(pooled, cfg.stats.thresholds);
    text::write_file((ctx.out / "profile.csv").string(),
                     csv_header(ctx) + format_profile_csv(cfg.stats.thresholds, fractions));

    const Interval overall = stratified_bootstrap_iqm_ci(
        scores, cfg.stats.n_boot, cfg.stats.level, derive_seed(ctx.seed, "report"), ctx.workers);
    const Interval chosen = stratified_bootstrap_iqm_ci(
        {scores[best]}, cfg.stats.n_boot, cfg.stats.level, derive_seed(ctx.seed, "report-selected"),
        ctx.workers);
    const auto interval = [](const Interval& i) {
        return json{{"point", i.point}, {"lo", i.lo}, {"hi", i.hi}};
    };
    write_json(ctx.out / "report.json",
               json{{"provenance", provenance(ctx, "report")},
                    {"expert_average_reward", j_expert},
                    {"random_average_reward", j_random},
                    {"selected_hyperparam", best},
                    {"selected_scores", scores[best]},
                    {"selected_iqm", interval(chosen)},
                    {"aggregate_iqm", interval(overall)},
                    {"level", cfg.stats.level},
                    {"n_boot", cfg.stats.n_boot}});
}

void verify_bounds(const RunContext& ctx) {
    VerifyConfig vc = ctx.config.bounds.verify;
    vc.seed = derive_seed(ctx.seed, "verify");
    vc.workers = ctx.workers;
    const auto report = verify_bound(vc);
    auto j = json::parse(format_verify_report(report));
    json out{{"provenance", provenance(ctx, "verify-bounds")}};
    for (auto& [k, v] : j.items()) out[k] = v;
    fs::create_directories(ctx.out);
    write_json(ctx.out / ("verify_" + std::string(to_string(vc.bound)) + ".json"), out);
}

}  // namespace

void run_stage(const RunContext& ctx, const std::string& stage) {
    fs::create_directories(ctx.out);
    if (stage == "generate-data") return generate_data(ctx);
    if (stage == "label-rewards") return label_rewards(ctx);
    if (stage == "train") return train(ctx);
    if (stage == "evaluate-offline") return evaluate_offline(ctx);
    if (stage == "select") return select(ctx);
    if (stage == "report") return report(ctx);
    if (stage == "verify-bounds") return verify_bounds(ctx);
    throw InvalidArgument("unknown stage '" + stage + "'");
}

void run_pipeline(const RunContext& ctx, const std::vector<std::string>& stages) {
    for (const auto& stage : stages) {
        try {
            run_stage(ctx, stage);
        } catch (const std::exception& e) {
            std::error_code ec;
            fs::create_directories(ctx.out, ec);
            const json failure{{"provenance", provenance(ctx, stage)},
                               {"failed_stage", stage},
                               {"error", e.what()}};
            std::ofstream(ctx.out / "failure.json") << failure.dump(2) << "\n";
            throw;
        }
    }
    std::error_code ec;
    fs::remove(ctx.out / "failure.json", ec);
}

}  // namespace ilbrl::cli

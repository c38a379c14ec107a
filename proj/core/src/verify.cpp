#include "ilbrl/verify.hpp"

#include "ilbrl/bounds.hpp"
#include "ilbrl/dataset.hpp"
#include "ilbrl/errors.hpp"
#include "ilbrl/ilbrl.hpp"
#include "ilbrl/parallel.hpp"
#include "ilbrl/phased_q.hpp"
#include "ilbrl/random.hpp"
#include "ilbrl/sampler.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ilbrl {

std::string_view to_string(BoundId id) {
    switch (id) {
        case BoundId::ValueGap: return "L1";
        case BoundId::Regret: return "L2";
        case BoundId::IntrinsicFloor: return "L6";
        case BoundId::ExtrinsicFloor: return "L7";
        case BoundId::Coverage: return "coverage";
    }
    return "unknown";
}

BoundId parse_bound_id(std::string_view name) {
    if (name == "L1") return BoundId::ValueGap;
    if (name == "L2") return BoundId::Regret;
    if (name == "L6") return BoundId::IntrinsicFloor;
    if (name == "L7") return BoundId::ExtrinsicFloor;
    if (name == "coverage" || name == "L4") return BoundId::Coverage;
    throw ParseError("unknown bound id '" + std::string(name) + "' (expected L1, L2, L6, L7 or coverage)");
}

namespace {

// Slack for comparing quantities that carry value-iteration or linear-solve
// round-off.
constexpr double kNumericSlack = 1e-9;

BoundCheck upper(double measured, double bound, double range) {
    BoundCheck c;
    c.measured = measured;
    c.bound = bound;
    c.margin = bound - measured;
    c.violated = measured > bound + kNumericSlack;
    c.vacuous = is_vacuous_upper(bound, range);
    return c;
}

BoundCheck lower(double measured, double floor) {
    BoundCheck c;
    c.measured = measured;
    c.bound = floor;
    c.margin = measured - floor;
    c.violated = measured < floor - kNumericSlack;
    c.vacuous = is_vacuous_lower(floor);
    return c;
}

TrialOutcome phased_q_trial(const VerifyConfig& cfg, std::uint64_t seed) {
    TrialOutcome out;
    out.seed = seed;
    Rng rng(seed);
    const TabularMdp mdp = random_mdp(rng, cfg.family);
    const double gamma = mdp.discount();
    const auto samples =
        ideal_parallel_samples(mdp, cfg.samples_per_phase * cfg.ell, rng.next());
    const auto result = phased_q_learn(samples, mdp.rewards(), gamma, cfg.ell);
    out.condition = max_concentration_error(mdp, samples, result);
    out.evaluated = out.condition <= cfg.eta_prime;
    if (!out.evaluated) return out;

    const ValueTable optimal = value_iteration(mdp, 1e-13, 10000000);
    const double range = 1.0 / (1.0 - gamma);
    if (cfg.bound == BoundId::ValueGap) {
        const double gap = (result.q.q - optimal.q).cwiseAbs().maxCoeff();
        out.checks.push_back(upper(gap, value_gap_bound(cfg.eta_prime, gamma, cfg.ell), range));
    } else {
        const Vector achieved = policy_value_discounted(mdp, result.policy).values(result.policy);
        const double regret = mdp.initial().dot(optimal.max_values() - achieved);
        out.checks.push_back(upper(regret, regret_bound(cfg.eta_prime, gamma, cfg.ell), range));
    }
    return out;
}

struct ExpertModel {
    TabularMdp mdp;
    DeterministicPolicy expert;
    int t_expert;
};

ExpertModel draw_expert_model(const VerifyConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    TabularMdp mdp = random_mdp(rng, cfg.family);
    DeterministicPolicy expert = random_policy(rng, mdp.num_states(), mdp.num_actions());
    const Matrix chain = chain_matrix(mdp, expert);
    const int t = mixing_time(chain, steady_state(chain));
    return {std::move(mdp), std::move(expert), t};
}

TrialOutcome intrinsic_floor_trial(const VerifyConfig& cfg, const ExpertModel& model,
                                   std::uint64_t seed) {
    TrialOutcome out;
    out.seed = seed;
    out.evaluated = true;
    const auto data = rollout(model.mdp, model.expert, cfg.expert_count, seed,
                              {0, Source::Expert});
    const auto reward =
        intrinsic_reward(data, model.mdp.num_states(), model.mdp.num_actions());
    const double mu = intrinsic_average_reward(model.mdp, model.expert, reward);
    const auto floor = intrinsic_floor(static_cast<std::uint64_t>(cfg.expert_count),
                                       model.mdp.num_states(), model.t_expert, cfg.nu);
    out.checks.push_back(lower(mu, floor.floor));
    return out;
}

TrialOutcome extrinsic_floor_trial(const VerifyConfig& cfg, std::uint64_t seed) {
    TrialOutcome out;
    out.seed = seed;
    out.evaluated = true;
    const ExpertModel model = draw_expert_model(cfg, derive_seed(seed, "model"));
    const auto& mdp = model.mdp;
    const auto data = rollout(mdp, model.expert, cfg.expert_count, derive_seed(seed, "expert"),
                              {0, Source::Expert});
    const TransitionDataset none{mdp.num_states(), mdp.num_actions(), Source::Exploratory, {}};
    const auto learned = run_ilbrl(data, none, exact_solver(mdp, 0.99, 1e-10));
    const double mu_expert = average_reward(mdp, model.expert);

    std::vector<DeterministicPolicy> policies{model.expert, learned.policy};
    Rng rng(derive_seed(seed, "policies"));
    for (int k = 0; k < cfg.random_policies; ++k)
        policies.push_back(random_policy(rng, mdp.num_states(), mdp.num_actions()));
    for (const auto& policy : policies) {
        const double mu_int = intrinsic_average_reward(mdp, policy, learned.reward);
        const double eps_prime = std::clamp(1.0 - mu_int, 0.0, 1.0);
        out.checks.push_back(lower(average_reward(mdp, policy),
                                   extrinsic_floor(eps_prime, mu_expert, model.t_expert)));
    }
    out.condition = model.t_expert;
    return out;
}

struct CoverageModel {
    TabularMdp mdp;
    StochasticPolicy explore;
    double p_min;
    int t_mix;
    long long budget;
};

CoverageModel draw_coverage_model(const VerifyConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    TabularMdp mdp = random_mdp(rng, cfg.family);
    auto explore = StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions());
    const Matrix chain = chain_matrix(mdp, explore);
    const Vector rho = steady_state(chain);
    const double p_min = rho.minCoeff() / static_cast<double>(mdp.num_actions());
    const int t = mixing_time(chain, rho);
    const double steps = cfg.safety_factor * cfg.per_pair_count *
                         min_explore_samples(t, p_min, mdp.num_states(), mdp.num_actions(),
                                             cfg.delta_second);
    return {std::move(mdp), std::move(explore), p_min, t,
            static_cast<long long>(std::ceil(steps))};
}

TrialOutcome coverage_trial(const VerifyConfig& cfg, const CoverageModel& model,
                            std::uint64_t seed) {
    TrialOutcome out;
    out.seed = seed;
    out.evaluated = true;
    BoundCheck c;
    c.bound = static_cast<double>(model.budget);
    try {
        const auto samples = simulate_parallel_sampler(
            model.mdp, model.explore, cfg.per_pair_count, model.p_min, model.t_mix,
            cfg.delta_second, seed, {cfg.safety_factor, model.budget});
        c.measured = static_cast<double>(samples.raw_steps);
    } catch (const CoverageError& e) {
        c.measured = static_cast<double>(e.steps_used());
        c.violated = true;
    }
    c.margin = c.bound - c.measured;
    out.condition = c.measured;
    out.checks.push_back(c);
    return out;
}

}  // namespace

VerifyReport verify_bound(const VerifyConfig& cfg) {
    if (cfg.trials < 1) throw InvalidArgument("verify_bound needs at least one trial");
    VerifyReport report;
    report.bound = cfg.bound;
    report.trials = cfg.trials;
    report.outcomes.resize(static_cast<std::size_t>(cfg.trials));

    const std::string stage = "verify-" + std::string(to_string(cfg.bound));
    const auto trial_seed = [&](std::size_t t) { return derive_seed(cfg.seed, stage, {t}); };

    switch (cfg.bound) {
        case BoundId::ValueGap:
        case BoundId::Regret:
            parallel_for(report.outcomes.size(), cfg.workers, [&](std::size_t t) {
                report.outcomes[t] = phased_q_trial(cfg, trial_seed(t));
            });
            break;
        case BoundId::IntrinsicFloor: {
            const auto model = draw_expert_model(cfg, derive_seed(cfg.seed, stage + "-model"));
            const auto floor = intrinsic_floor(static_cast<std::uint64_t>(cfg.expert_count),
                                               model.mdp.num_states(), model.t_expert, cfg.nu);
            report.stated_delta = std::min(1.0, floor.fail_prob);
            parallel_for(report.outcomes.size(), cfg.workers, [&](std::size_t t) {
                report.outcomes[t] = intrinsic_floor_trial(cfg, model, trial_seed(t));
            });
            break;
        }
        case BoundId::ExtrinsicFloor:
            parallel_for(report.outcomes.size(), cfg.workers, [&](std::size_t t) {
                report.outcomes[t] = extrinsic_floor_trial(cfg, trial_seed(t));
            });
            break;
        case BoundId::Coverage: {
            const auto model = draw_coverage_model(cfg, derive_seed(cfg.seed, stage + "-model"));
            report.stated_delta = cfg.delta_second;
            report.p_min = model.p_min;
            report.mixing_time = model.t_mix;
            parallel_for(report.outcomes.size(), cfg.workers, [&](std::size_t t) {
                report.outcomes[t] = coverage_trial(cfg, model, trial_seed(t));
            });
            break;
        }
    }

    double margin_sum = 0.0;
    report.min_margin = std::numeric_limits<double>::infinity();
    report.max_margin = -std::numeric_limits<double>::infinity();
    for (const auto& o : report.outcomes) {
        if (!o.evaluated) continue;
        ++report.evaluated;
        for (const auto& c : o.checks) {
            ++report.checks;
            report.violations += c.violated ? 1 : 0;
            report.vacuous += c.vacuous ? 1 : 0;
            margin_sum += c.margin;
            report.min_margin = std::min(report.min_margin, c.margin);
            report.max_margin = std::max(report.max_margin, c.margin);
        }
    }
    if (report.checks > 0) {
        report.mean_margin = margin_sum / report.checks;
        report.violation_rate = static_cast<double>(report.violations) / report.checks;
        const double d = report.stated_delta;
        report.allowed_rate = d + 3.0 * std::sqrt(d * (1.0 - d) / report.checks);
        report.passed = report.violation_rate <= report.allowed_rate;
    } else {
        report.min_margin = report.max_margin = 0.0;
    }
    return report;
}

std::string format_verify_report(const VerifyReport& r) {
    nlohmann::ordered_json j;
    j["bound"] = std::string(to_string(r.bound));
    j["trials"] = r.trials;
    j["evaluated"] = r.evaluated;
    j["checks"] = r.checks;
    j["violations"] = r.violations;
    j["vacuous"] = r.vacuous;
    j["violation_rate"] = r.violation_rate;
    j["stated_delta"] = r.stated_delta;
    j["allowed_rate"] = r.allowed_rate;
    j["margin"] = {{"min", r.min_margin}, {"mean", r.mean_margin}, {"max", r.max_margin}};
    if (r.bound == BoundId::Coverage) {
        j["p_min"] = r.p_min;
        j["mixing_time"] = r.mixing_time;
    }
    j["passed"] = r.passed;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::ordered_json row;
        row["seed"] = o.seed;
        row["evaluated"] = o.evaluated;
        row["condition"] = o.condition;
        auto checks = nlohmann::ordered_json::array();
        for (const auto& c : o.checks)
            checks.push_back({{"measured", c.measured},
                              {"bound", c.bound},
                              {"margin", c.margin},
                              {"violated", c.violated},
                              {"vacuous", c.vacuous}});
        row["checks"] = std::move(checks);
        rows.push_back(std::move(row));
    }
    j["outcomes"] = std::move(rows);
    return j.dump(2) + "\n";
}

}  // namespace ilbrl

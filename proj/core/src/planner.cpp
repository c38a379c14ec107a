#include "ilbrl/planner.hpp"

#include "ilbrl/bounds.hpp"
#include "ilbrl/errors.hpp"
#include "ilbrl/text.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace ilbrl {

namespace {

constexpr double kExactLimit = 9007199254740992.0;  // 2^53

std::uint64_t checked_ceil(double value, const char* name) {
    if (!std::isfinite(value) || value > kExactLimit)
        throw PlanningError(std::string(name) + " exceeds 2^53 (" + text::format_double(value) + ")");
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(value)));
}

}  // namespace

BoundParameters plan_parameters(const PlannerInput& in) {
    if (!(in.epsilon > 0.0 && std::isfinite(in.epsilon)))
        throw InvalidArgument("epsilon must be positive");
    if (!(in.delta > 0.0 && in.delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (in.num_states < 1 || in.num_actions < 1)
        throw InvalidArgument("state and action counts must be positive");
    if (in.t_expert < 1 || in.t_explore < 1) throw InvalidArgument("mixing times must be at least 1");
    if (!(in.p_min > 0.0 && in.p_min <= 1.0)) throw InvalidArgument("p_min must lie in (0, 1]");
    if (!(in.beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (!(in.lambda2 >= 0.0 && in.lambda2 < 1.0)) throw InvalidArgument("|lambda2| must lie in [0, 1)");

    BoundParameters p;
    p.input = in;
    p.delta_prime = in.delta / 4.0;
    p.delta_second = in.delta / 4.0;
    p.delta_third = in.delta / 2.0;

    const double t = in.t_expert;
    const double eps = in.epsilon;
    p.alpha = 4.0 * (1.0 + 4.0 * t) / eps;
    const double ab2 = 2.0 * p.alpha * in.beta;
    if (!(ab2 > 1.0)) throw PlanningError("2 alpha beta must exceed 1 for a discount in [0, 1)");
    p.gamma = (ab2 - 1.0) / (ab2 - in.lambda2);
    const double one_minus_gamma = (1.0 - in.lambda2) / (ab2 - in.lambda2);
    p.eta = 1.0 / (p.alpha * one_minus_gamma);
    p.nu = 1.0 / p.alpha;

    // l = ceil(log_gamma((1 - gamma) / (4 alpha))), in log space.
    const double log_gamma = std::log1p(-one_minus_gamma);
    if (!(log_gamma < 0.0)) throw PlanningError("discount is numerically 1; log_gamma underflows");
    const double log_target = std::log(one_minus_gamma) - std::log(4.0 * p.alpha);
    p.ell = checked_ceil(log_target / log_gamma, "iteration count l");

    const double log_gamma_l = static_cast<double>(p.ell) * log_gamma;
    const double gamma_l = std::exp(log_gamma_l);
    const double head = p.eta * one_minus_gamma * one_minus_gamma;
    if (!(head > 2.0 * gamma_l))
        throw PlanningError("eta (1 - gamma)^2 > 2 gamma^l is violated");
    p.eta_prime = (head / 2.0 - gamma_l) / p.gamma;

    p.phase_samples = min_phase_samples(p.eta, p.gamma, static_cast<long long>(p.ell),
                                        in.num_states, in.num_actions, p.delta_prime);
    p.m = checked_ceil(p.phase_samples / static_cast<double>(p.ell), "samples per phase m");

    p.T = static_cast<std::uint64_t>(thinning_period(in.t_explore, in.p_min));
    const double sa = static_cast<double>(in.num_states * in.num_actions);
    p.N = checked_ceil(2.0 / in.p_min * std::log(sa / p.delta_second), "coverage samples N");
    p.explore_steps = min_explore_samples(in.t_explore, in.p_min, in.num_states, in.num_actions,
                                          p.delta_second);

    const double growth = (1.0 + 4.0 * t) * (1.0 + 4.0 * t);
    p.expert_count_coverage = checked_ceil(
        128.0 * static_cast<double>(in.num_states) * t * growth / (eps * eps), "expert count");
    p.expert_count_confidence =
        checked_ceil(72.0 * t * growth * std::log(4.0 / in.delta) / (eps * eps), "expert count");
    p.expert_count = std::max(p.expert_count_coverage, p.expert_count_confidence);
    p.explore_count = std::ceil(p.explore_steps) * static_cast<double>(p.ell) *
                      static_cast<double>(p.m);
    return p;
}

std::string format_parameter_ledger(const BoundParameters& p) {
    std::ostringstream out;
    const auto row = [&](const char* name, const std::string& value, const char* formula) {
        out << name << ' ' << value << " # " << formula << '\n';
    };
    const auto d = [](double v) { return text::format_double(v); };
    const auto u = [](std::uint64_t v) { return std::to_string(v); };
    out << "# ilbrl-parameters 1\n";
    row("epsilon", d(p.input.epsilon), "input");
    row("delta", d(p.input.delta), "input");
    row("states", u(p.input.num_states), "input");
    row("actions", u(p.input.num_actions), "input");
    row("t_expert", u(static_cast<std::uint64_t>(p.input.t_expert)), "input");
    row("t_explore", u(static_cast<std::uint64_t>(p.input.t_explore)), "input");
    row("p_min", d(p.input.p_min), "input");
    row("beta", d(p.input.beta), "input: kappa(Sigma) ||r||_2");
    row("lambda2", d(p.input.lambda2), "input");
    row("delta_prime", d(p.delta_prime), "delta / 4");
    row("delta_second", d(p.delta_second), "delta / 4");
    row("delta_third", d(p.delta_third), "delta / 2");
    row("alpha", d(p.alpha), "4 (1 + 4 t_E) / epsilon");
    row("gamma", d(p.gamma), "(2 alpha beta - 1) / (2 alpha beta - |lambda2|)");
    row("eta", d(p.eta), "1 / (alpha (1 - gamma))");
    row("nu", d(p.nu), "1 / alpha");
    row("ell", u(p.ell), "ceil(log_gamma((1 - gamma) / (4 alpha)))");
    row("eta_prime", d(p.eta_prime), "[eta (1 - gamma)^2 / 2 - gamma^l] / gamma");
    row("phase_samples", d(p.phase_samples),
        "log(2 l S A / delta') 2 gamma^2 l / [(1 - gamma)^2 (eta (1 - gamma)^2 - 2 gamma^l)^2]");
    row("m", u(p.m), "ceil(phase_samples / l)");
    row("T", u(p.T), "ceil(t_X log(2 / p_min) / log 2)");
    row("N", u(p.N), "ceil(2 / p_min log(S A / delta''))");
    row("explore_steps", d(p.explore_steps),
        "2 t_X / (log 2 p_min) log(2 / p_min) log(S A / delta'')");
    row("expert_count_coverage", u(p.expert_count_coverage),
        "ceil(128 S t_E (1 + 4 t_E)^2 / epsilon^2)");
    row("expert_count_confidence", u(p.expert_count_confidence),
        "ceil(72 t_E (1 + 4 t_E)^2 log(4 / delta) / epsilon^2)");
    row("expert_count", u(p.expert_count), "max of the two expert counts");
    row("explore_count", d(p.explore_count), "ceil(explore_steps) l m");
    return out.str();
}

BoundParameters parse_parameter_ledger(std::string_view contents) {
    std::map<std::string, std::string, std::less<>> values;
    std::istringstream in{std::string(contents)};
    std::string line;
    while (std::getline(in, line)) {
        const auto tokens = text::split_ws(line);
        if (tokens.size() < 2 || tokens[0].front() == '#') continue;
        values[std::string(tokens[0])] = std::string(tokens[1]);
    }
    const auto get = [&](const char* key) -> const std::string& {
        const auto it = values.find(key);
        if (it == values.end()) throw ParseError(std::string("parameter ledger lacks '") + key + "'");
        return it->second;
    };
    PlannerInput input;
    input.epsilon = text::parse_double(get("epsilon"));
    input.delta = text::parse_double(get("delta"));
    input.num_states = static_cast<std::size_t>(text::parse_int(get("states")));
    input.num_actions = static_cast<std::size_t>(text::parse_int(get("actions")));
    input.t_expert = static_cast<int>(text::parse_int(get("t_expert")));
    input.t_explore = static_cast<int>(text::parse_int(get("t_explore")));
    input.p_min = text::parse_double(get("p_min"));
    input.beta = text::parse_double(get("beta"));
    input.lambda2 = text::parse_double(get("lambda2"));
    return plan_parameters(input);
}

}  // namespace ilbrl

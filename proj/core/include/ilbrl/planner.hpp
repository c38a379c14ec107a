#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace ilbrl {

struct PlannerInput {
    double epsilon = 0.1;
    double delta = 0.1;
    std::size_t num_states = 1;
    std::size_t num_actions = 1;
    int t_expert = 1;
    int t_explore = 1;
    double p_min = 1.0;
    double beta = 1.0;
    double lambda2 = 0.0;
};

/// Every constant of the end-to-end sample-complexity budget.
///
/// Integer counts are exact while below 2^53. explore_count = N_steps * l * m
/// is kept as a double because it routinely exceeds that range.
struct BoundParameters {
    PlannerInput input;
    double delta_prime = 0.0;    ///< phased Q-learning failure share, delta / 4
    double delta_second = 0.0;   ///< sampler coverage failure share, delta / 4
    double delta_third = 0.0;    ///< expert-data failure share, delta / 2
    double alpha = 0.0;          ///< 4 (1 + 4 t_E) / epsilon
    double gamma = 0.0;          ///< (2 alpha beta - 1) / (2 alpha beta - |lambda2|)
    double eta = 0.0;            ///< 1 / (alpha (1 - gamma))
    double nu = 0.0;             ///< 1 / alpha
    double eta_prime = 0.0;      ///< [eta (1 - gamma)^2 / 2 - gamma^l] / gamma
    std::uint64_t ell = 0;       ///< ceil(log_gamma((1 - gamma) / (4 alpha)))
    double phase_samples = 0.0;  ///< m l lower bound before rounding
    std::uint64_t m = 0;         ///< ceil(phase_samples / l)
    std::uint64_t T = 0;         ///< thinning period
    std::uint64_t N = 0;         ///< ceil(2 / p_min log(S A / delta''))
    double explore_steps = 0.0;  ///< exploration-coverage step bound
    std::uint64_t expert_count_coverage = 0;    ///< ceil(128 S t (1 + 4t)^2 / eps^2)
    std::uint64_t expert_count_confidence = 0;  ///< ceil(72 t (1 + 4t)^2 log(4 / delta) / eps^2)
    std::uint64_t expert_count = 0;
    double explore_count = 0.0;  ///< ceil(explore_steps) * l * m
};

/// Instantiates the budget. Throws InvalidArgument for inputs outside their
/// domains and PlanningError when a count overflows 2^53 or the phase
/// precondition eta (1 - gamma)^2 > 2 gamma^l fails.
BoundParameters plan_parameters(const PlannerInput& input);

/// Human-readable ledger: one `name value formula` line per constant.
std::string format_parameter_ledger(const BoundParameters& params);

/// Reads the planner inputs back from a ledger and re-plans.
BoundParameters parse_parameter_ledger(std::string_view contents);

}  // namespace ilbrl

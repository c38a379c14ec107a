#include "ilbrl/bounds.hpp"

#include "ilbrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ilbrl {

namespace {

void require_discount(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
}

double power(double gamma, long long ell) { return std::pow(gamma, static_cast<double>(ell)); }

}  // namespace

double value_gap_bound(double eta_prime, double gamma, long long ell) {
    require_discount(gamma);
    if (ell < 0) throw InvalidArgument("iteration count must be non-negative");
    return (eta_prime * gamma + power(gamma, ell)) / (1.0 - gamma);
}

double regret_bound(double eta_prime, double gamma, long long ell) {
    return 2.0 / (1.0 - gamma) * value_gap_bound(eta_prime, gamma, ell);
}

double min_phase_samples(double eta, double gamma, long long ell, std::size_t num_states,
                         std::size_t num_actions, double delta_prime) {
    require_discount(gamma);
    if (ell < 1) throw InvalidArgument("iteration count must be at least 1");
    if (!(delta_prime > 0.0 && delta_prime < 1.0))
        throw InvalidArgument("failure probability must lie in (0, 1)");
    const double slack = eta * (1.0 - gamma) * (1.0 - gamma) - 2.0 * power(gamma, ell);
    if (!(slack > 0.0))
        throw InvalidArgument("eta (1 - gamma)^2 > 2 gamma^l is violated (slack " +
                              std::to_string(slack) + "); increase the iteration count l");
    const double sa = static_cast<double>(num_states * num_actions);
    const double l = static_cast<double>(ell);
    return std::log(2.0 * l * sa / delta_prime) * 2.0 * gamma * gamma * l /
           ((1.0 - gamma) * (1.0 - gamma) * slack * slack);
}

double min_explore_samples(int t_explore, double p_min, std::size_t num_states,
                           std::size_t num_actions, double delta_second) {
    if (!(p_min > 0.0 && p_min <= 1.0)) throw InvalidArgument("p_min must lie in (0, 1]");
    if (t_explore < 1) throw InvalidArgument("mixing time must be at least 1");
    if (!(delta_second > 0.0 && delta_second <= 1.0))
        throw InvalidArgument("failure probability must lie in (0, 1]");
    const double sa = static_cast<double>(num_states * num_actions);
    return 2.0 * t_explore / (std::log(2.0) * p_min) * std::log(2.0 / p_min) *
           std::log(sa / delta_second);
}

double average_gap(double epsilon, double gamma, double lambda2, double beta) {
    require_discount(gamma);
    if (!(lambda2 >= 0.0 && lambda2 < 1.0)) throw InvalidArgument("|lambda2| must lie in [0, 1)");
    return beta * (1.0 - gamma) / (1.0 - gamma * lambda2) + (1.0 - gamma) * epsilon;
}

IntrinsicFloor intrinsic_floor(std::uint64_t expert_count, std::size_t num_states, int t_expert,
                               double nu) {
    if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
    if (expert_count == 0) throw InvalidArgument("expert dataset size must be positive");
    if (t_expert < 1) throw InvalidArgument("mixing time must be at least 1");
    const double n = static_cast<double>(expert_count);
    const double t = static_cast<double>(t_expert);
    return {1.0 - nu - std::sqrt(8.0 * static_cast<double>(num_states) * t / n),
            2.0 * std::exp(-nu * nu * n / (4.5 * t))};
}

double extrinsic_floor(double eps_prime, double mu_expert, int t_expert) {
    if (!(eps_prime >= 0.0 && eps_prime <= 1.0)) throw InvalidArgument("eps' must lie in [0, 1]");
    return (1.0 - eps_prime) * mu_expert - 4.0 * t_expert * eps_prime;
}

int thinning_period(int t_mix, double p_min) {
    if (t_mix < 1) throw InvalidArgument("mixing time must be at least 1");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw InvalidArgument("p_min must lie in (0, 1]");
    const double raw = t_mix * std::log2(2.0 / p_min);
    // Round away representation noise before the ceiling: ceil(3 + 4e-16) is not 4.
    const double nearest = std::round(raw);
    const double value = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest : raw;
    return std::max(1, static_cast<int>(std::ceil(value)));
}

}  // namespace ilbrl

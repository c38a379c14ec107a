#include "ilbrl/generators.hpp"

#include "ilbrl/errors.hpp"

#include <cmath>
#include <vector>

namespace ilbrl {

namespace {

// Marsaglia-Tsang gamma sampler built on the platform-independent Rng.
double gamma_variate(Rng& rng, double shape) {
    if (shape == 1.0) return rng.exponential();
    if (shape < 1.0) {
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        return gamma_variate(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        // Box-Muller normal
        double u1 = rng.uniform();
        while (u1 == 0.0) u1 = rng.uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * rng.uniform());
        double v = 1.0 + c * z;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

Vector random_distribution(Rng& rng, std::size_t n, double concentration) {
    if (n == 0 || !(concentration > 0.0))
        throw InvalidArgument("random_distribution: need n > 0 and concentration > 0");
    Vector p(static_cast<Eigen::Index>(n));
    double total = 0.0;
    do {
        for (Eigen::Index i = 0; i < p.size(); ++i) total += (p(i) = gamma_variate(rng, concentration));
    } while (total == 0.0);
    p /= total;
    // Renormalise once more so the row sums to one to the last ulp or so.
    p /= p.sum();
    return p;
}

TabularMdp random_mdp(Rng& rng, const MdpFamily& family) {
    const std::size_t S = family.num_states;
    const std::size_t A = family.num_actions;
    if (S == 0 || A == 0) throw InvalidArgument("random_mdp: empty state or action space");
    if (family.min_probability < 0.0 || family.min_probability * static_cast<double>(S) >= 1.0)
        throw InvalidArgument("random_mdp: min_probability must lie in [0, 1/S)");
    std::vector<double> transitions;
    transitions.reserve(S * A * S);
    const double free_mass = 1.0 - family.min_probability * static_cast<double>(S);
    for (std::size_t i = 0; i < S * A; ++i) {
        Vector row = random_distribution(rng, S, family.concentration);
        row = (row * free_mass).array() + family.min_probability;
        row /= row.sum();
        transitions.insert(transitions.end(), row.data(), row.data() + S);
    }
    Matrix rewards(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
    for (Eigen::Index s = 0; s < rewards.rows(); ++s)
        for (Eigen::Index a = 0; a < rewards.cols(); ++a) rewards(s, a) = rng.uniform();
    Vector initial = family.uniform_initial
                         ? Vector::Constant(static_cast<Eigen::Index>(S), 1.0 / static_cast<double>(S))
                         : random_distribution(rng, S);
    return TabularMdp(S, A, std::move(transitions), std::move(rewards), std::move(initial),
                      family.discount);
}

DeterministicPolicy random_policy(Rng& rng, std::size_t num_states, std::size_t num_actions) {
    std::vector<int> actions(num_states);
    for (auto& a : actions) a = static_cast<int>(rng.below(num_actions));
    return DeterministicPolicy(std::move(actions));
}

}  // namespace ilbrl

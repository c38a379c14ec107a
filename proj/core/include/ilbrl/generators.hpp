#pragma once

#include "ilbrl/mdp.hpp"
#include "ilbrl/random.hpp"

namespace ilbrl {

/// Random MDP family used by tests, verifiers and the CLI.
struct MdpFamily {
    std::size_t num_states = 5;
    std::size_t num_actions = 2;
    double discount = 0.9;
    /// Symmetric Dirichlet concentration of each P(s, a, .). Values below 1
    /// give peaked (near-deterministic) rows.
    double concentration = 1.0;
    /// Each next-state probability is at least this (must be < 1/S). A
    /// positive floor makes every policy's chain ergodic.
    double min_probability = 0.0;
    /// Uniform initial distribution when true, otherwise a Dirichlet(1) draw.
    bool uniform_initial = true;
};

/// Probability vector drawn from a symmetric Dirichlet.
Vector random_distribution(Rng& rng, std::size_t n, double concentration = 1.0);

TabularMdp random_mdp(Rng& rng, const MdpFamily& family);

DeterministicPolicy random_policy(Rng& rng, std::size_t num_states, std::size_t num_actions);

}  // namespace ilbrl

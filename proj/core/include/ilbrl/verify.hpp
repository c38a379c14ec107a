#pragma once

#include "ilbrl/generators.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ilbrl {

enum class BoundId { ValueGap, Regret, IntrinsicFloor, ExtrinsicFloor, Coverage };

/// Short ids used in configs and reports: L1, L2, L6, L7, coverage.
std::string_view to_string(BoundId id);
BoundId parse_bound_id(std::string_view name);

struct VerifyConfig {
    BoundId bound = BoundId::ValueGap;
    MdpFamily family;
    int trials = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    // L1 / L2: phased Q-learning on the ideal parallel sampler.
    int ell = 30;
    int samples_per_phase = 100;
    double eta_prime = 0.5;

    // L6 / L7: expert data.
    int expert_count = 2000;
    double nu = 0.1;
    int random_policies = 8;

    // coverage
    int per_pair_count = 1;
    double safety_factor = 1.0;
    double delta_second = 0.1;
};

/// Both sides of one inequality. For upper bounds `measured <= bound`, for
/// floors `measured >= bound`; margin is positive when the bound holds.
struct BoundCheck {
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    bool violated = false;
    bool vacuous = false;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    bool evaluated = false;  ///< the bound's precondition held on this trial
    std::vector<BoundCheck> checks;
    double condition = 0.0;  ///< measured concentration, or steps used for coverage
};

struct VerifyReport {
    BoundId bound = BoundId::ValueGap;
    int trials = 0;
    int evaluated = 0;
    int checks = 0;
    int violations = 0;
    int vacuous = 0;
    double min_margin = 0.0;
    double mean_margin = 0.0;
    double max_margin = 0.0;
    /// Stated failure probability (0 for deterministic bounds).
    double stated_delta = 0.0;
    /// stated_delta + 3 sqrt(stated_delta (1 - stated_delta) / checks).
    double allowed_rate = 0.0;
    double violation_rate = 0.0;
    /// Coverage only: the exploratory chain's p_min and mixing time.
    double p_min = 0.0;
    int mixing_time = 0;
    bool passed = false;
    std::vector<TrialOutcome> outcomes;
};

/// Runs `trials` independent trials (seeded by derive_seed(seed, id, {t})),
/// measures both sides of the chosen bound and counts violations. The
/// result does not depend on the worker count.
VerifyReport verify_bound(const VerifyConfig& config);

/// Machine-readable summary (JSON) including per-trial rows.
std::string format_verify_report(const VerifyReport& report);

}  // namespace ilbrl

#pragma once

#include "ilbrl/errors.hpp"
#include "ilbrl/generators.hpp"
#include "ilbrl/ope.hpp"
#include "ilbrl/verify.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ilbrl::cli {

/// Raised for invalid configs; the message names the field and constraint.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct MdpSection {
    MdpFamily family{8, 3, 0.9, 1.0, 0.005, true};
    std::string file;  ///< load this MDP instead of drawing one
};

struct DataSection {
    int expert_steps = 2000;
    int explore_steps = 60000;
    int horizon = 50;
    double train_fraction = 0.5;
    double ope_fraction = 0.5;
};

struct SolverSection {
    std::string kind = "phased-q";  ///< phased-q or exact
    std::vector<double> gammas{0.95};  ///< one hyperparameter per entry
    int ell = 100;
    int m = 4;
    int thinning = 1;
};

struct OpeSection {
    std::vector<double> learning_rates{0.5};
    std::vector<double> taus{0.5};
    std::vector<double> expert_fractions;  ///< empty: use the data as is
    int passes = 100;
    double lr_decay = 0.5;
    int batch_size = 1;
    double discount = 0.9;
    std::optional<double> divergence_threshold;
    int eval_seeds = 2;
    int known_random_policies = 2;

    std::vector<OpeConfig> grid() const;
};

struct SelectionSection {
    int policy_seeds = 3;
};

struct StatsSection {
    int n_boot = 2000;
    double level = 0.95;
    std::vector<double> thresholds{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
};

struct BoundsSection {
    VerifyConfig verify;
};

inline const std::vector<std::string> kPipelineStages{
    "generate-data", "label-rewards", "train", "evaluate-offline", "select", "report"};

struct Config {
    std::vector<std::string> stages = kPipelineStages;
    MdpSection mdp;
    DataSection data;
    SolverSection solver;
    OpeSection ope;
    SelectionSection selection;
    StatsSection stats;
    BoundsSection bounds;
    /// FNV-1a of the config bytes, as 16 hex digits.
    std::string hash;
};

/// Parses INI text. Unknown sections or keys and out-of-range values throw
/// ConfigError, e.g. "[data] train_fraction = 1.5: must lie in (0, 1)".
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

bool is_stage(std::string_view name);

}  // namespace ilbrl::cli

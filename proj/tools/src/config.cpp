#include "ilbrl_cli/config.hpp"

#include "ilbrl/random.hpp"
#include "ilbrl/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ilbrl::cli {

namespace pt = boost::property_tree;

std::vector<OpeConfig> OpeSection::grid() const {
    std::vector<OpeConfig> out;
    const std::vector<std::optional<double>> fractions =
        expert_fractions.empty()
            ? std::vector<std::optional<double>>{std::nullopt}
            : std::vector<std::optional<double>>(expert_fractions.begin(), expert_fractions.end());
    for (double lr : learning_rates)
        for (double tau : taus)
            for (const auto& f : fractions) {
                OpeConfig c;
                c.learning_rate = lr;
                c.tau = tau;
                c.expert_data_fraction = f;
                c.passes = passes;
                c.divergence_threshold = divergence_threshold;
                c.discount = discount;
                c.lr_decay = lr_decay;
                c.batch_size = batch_size;
                out.push_back(c);
            }
    return out;
}

bool is_stage(std::string_view name) {
    return name == "verify-bounds" ||
           std::find(kPipelineStages.begin(), kPipelineStages.end(), name) != kPipelineStages.end();
}

namespace {

struct Field {
    std::string section;
    std::string key;
    std::string value;

    [[noreturn]] void fail(const std::string& constraint) const {
        throw ConfigError((section.empty() ? "" : "[" + section + "] ") + key + " = " + value + ": " +
                          constraint);
    }
    double real() const {
        try {
            return text::parse_double(value);
        } catch (const Error&) {
            fail("expected a number");
        }
    }
    long long integer() const {
        try {
            return text::parse_int(value);
        } catch (const Error&) {
            fail("expected an integer");
        }
    }
    std::vector<double> reals() const {
        std::vector<double> out;
        for (auto token : text::split(value, ',')) {
            while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
            while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
            try {
                out.push_back(text::parse_double(token));
            } catch (const Error&) {
                fail("expected a comma-separated list of numbers");
            }
        }
        if (out.empty()) fail("list must not be empty");
        return out;
    }
};

using Setter = std::function<void(Config&, const Field&)>;

int positive(const Field& f) {
    const auto v = f.integer();
    if (v < 1 || v > 2000000000) f.fail("must be a positive integer");
    return static_cast<int>(v);
}

double open_unit(const Field& f) {
    const double v = f.real();
    if (!(v > 0.0 && v < 1.0)) f.fail("must lie in (0, 1)");
    return v;
}

double discount(const Field& f) {
    const double v = f.real();
    if (!(v >= 0.0 && v < 1.0)) f.fail("must lie in [0, 1)");
    return v;
}

double positive_real(const Field& f) {
    const double v = f.real();
    if (!(v > 0.0)) f.fail("must be positive");
    return v;
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> table{
        {"", {{"stages", [](Config& c, const Field& f) {
                   c.stages.clear();
                   for (auto token : text::split(f.value, ',')) {
                       while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
                       while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
                       if (!is_stage(token)) f.fail("unknown stage '" + std::string(token) + "'");
                       c.stages.emplace_back(token);
                   }
                   if (c.stages.empty()) f.fail("list must not be empty");
               }}}},
        {"mdp",
         {{"states", [](Config& c, const Field& f) { c.mdp.family.num_states = static_cast<std::size_t>(positive(f)); }},
          {"actions", [](Config& c, const Field& f) { c.mdp.family.num_actions = static_cast<std::size_t>(positive(f)); }},
          {"discount", [](Config& c, const Field& f) { c.mdp.family.discount = discount(f); }},
          {"concentration", [](Config& c, const Field& f) { c.mdp.family.concentration = positive_real(f); }},
          {"min_probability", [](Config& c, const Field& f) {
               const double v = f.real();
               if (!(v >= 0.0)) f.fail("must be non-negative");
               c.mdp.family.min_probability = v;
           }},
          {"uniform_initial", [](Config& c, const Field& f) {
               if (f.value != "true" && f.value != "false") f.fail("must be true or false");
               c.mdp.family.uniform_initial = f.value == "true";
           }},
          {"file", [](Config& c, const Field& f) { c.mdp.file = f.value; }}}},
        {"data",
         {{"expert_steps", [](Config& c, const Field& f) { c.data.expert_steps = positive(f); }},
          {"explore_steps", [](Config& c, const Field& f) { c.data.explore_steps = positive(f); }},
          {"horizon", [](Config& c, const Field& f) { c.data.horizon = positive(f); }},
          {"train_fraction", [](Config& c, const Field& f) { c.data.train_fraction = open_unit(f); }},
          {"ope_fraction", [](Config& c, const Field& f) { c.data.ope_fraction = open_unit(f); }}}},
        {"solver",
         {{"kind", [](Config& c, const Field& f) {
               if (f.value != "phased-q" && f.value != "exact") f.fail("must be phased-q or exact");
               c.solver.kind = f.value;
           }},
          {"gammas", [](Config& c, const Field& f) {
               c.solver.gammas = f.reals();
               for (double g : c.solver.gammas)
                   if (!(g >= 0.0 && g < 1.0)) f.fail("every entry must lie in [0, 1)");
           }},
          {"ell", [](Config& c, const Field& f) { c.solver.ell = positive(f); }},
          {"m", [](Config& c, const Field& f) { c.solver.m = positive(f); }},
          {"thinning", [](Config& c, const Field& f) { c.solver.thinning = positive(f); }}}},
        {"ope",
         {{"learning_rates", [](Config& c, const Field& f) {
               c.ope.learning_rates = f.reals();
               for (double v : c.ope.learning_rates)
                   if (!(v > 0.0)) f.fail("every entry must be positive");
           }},
          {"taus", [](Config& c, const Field& f) {
               c.ope.taus = f.reals();
               for (double v : c.ope.taus)
                   if (!(v > 0.0 && v <= 1.0)) f.fail("every entry must lie in (0, 1]");
           }},
          {"expert_fractions", [](Config& c, const Field& f) {
               c.ope.expert_fractions = f.reals();
               for (double v : c.ope.expert_fractions)
                   if (!(v >= 0.0 && v <= 1.0)) f.fail("every entry must lie in [0, 1]");
           }},
          {"passes", [](Config& c, const Field& f) { c.ope.passes = positive(f); }},
          {"lr_decay", [](Config& c, const Field& f) {
               const double v = f.real();
               if (!(v >= 0.0)) f.fail("must be non-negative");
               c.ope.lr_decay = v;
           }},
          {"batch_size", [](Config& c, const Field& f) { c.ope.batch_size = positive(f); }},
          {"discount", [](Config& c, const Field& f) { c.ope.discount = discount(f); }},
          {"divergence_threshold", [](Config& c, const Field& f) { c.ope.divergence_threshold = positive_real(f); }},
          {"eval_seeds", [](Config& c, const Field& f) { c.ope.eval_seeds = positive(f); }},
          {"known_random_policies", [](Config& c, const Field& f) { c.ope.known_random_policies = positive(f); }}}},
        {"selection",
         {{"policy_seeds", [](Config& c, const Field& f) { c.selection.policy_seeds = positive(f); }}}},
        {"stats",
         {{"n_boot", [](Config& c, const Field& f) {
               const int v = positive(f);
               if (v < 100) f.fail("must be at least 100");
               c.stats.n_boot = v;
           }},
          {"level", [](Config& c, const Field& f) { c.stats.level = open_unit(f); }},
          {"thresholds", [](Config& c, const Field& f) {
               c.stats.thresholds = f.reals();
               if (!std::is_sorted(c.stats.thresholds.begin(), c.stats.thresholds.end()))
                   f.fail("must be in increasing order");
           }}}},
        {"bounds",
         {{"bound", [](Config& c, const Field& f) {
               try {
                   c.bounds.verify.bound = parse_bound_id(f.value);
               } catch (const Error&) {
                   f.fail("must be one of L1, L2, L6, L7, coverage");
               }
           }},
          {"trials", [](Config& c, const Field& f) { c.bounds.verify.trials = positive(f); }},
          {"states", [](Config& c, const Field& f) { c.bounds.verify.family.num_states = static_cast<std::size_t>(positive(f)); }},
          {"actions", [](Config& c, const Field& f) { c.bounds.verify.family.num_actions = static_cast<std::size_t>(positive(f)); }},
          {"discount", [](Config& c, const Field& f) { c.bounds.verify.family.discount = discount(f); }},
          {"min_probability", [](Config& c, const Field& f) {
               const double v = f.real();
               if (!(v >= 0.0)) f.fail("must be non-negative");
               c.bounds.verify.family.min_probability = v;
           }},
          {"ell", [](Config& c, const Field& f) { c.bounds.verify.ell = positive(f); }},
          {"samples_per_phase", [](Config& c, const Field& f) { c.bounds.verify.samples_per_phase = positive(f); }},
          {"eta_prime", [](Config& c, const Field& f) { c.bounds.verify.eta_prime = positive_real(f); }},
          {"expert_count", [](Config& c, const Field& f) { c.bounds.verify.expert_count = positive(f); }},
          {"nu", [](Config& c, const Field& f) { c.bounds.verify.nu = positive_real(f); }},
          {"random_policies", [](Config& c, const Field& f) {
               const auto v = f.integer();
               if (v < 0 || v > 100000) f.fail("must lie in [0, 100000]");
               c.bounds.verify.random_policies = static_cast<int>(v);
           }},
          {"per_pair_count", [](Config& c, const Field& f) { c.bounds.verify.per_pair_count = positive(f); }},
          {"safety_factor", [](Config& c, const Field& f) { c.bounds.verify.safety_factor = positive_real(f); }},
          {"delta_second", [](Config& c, const Field& f) { c.bounds.verify.delta_second = open_unit(f); }}}},
    };
    return table;
}

void check_cross_fields(const Config& c) {
    const auto& fam = c.mdp.family;
    if (fam.min_probability * static_cast<double>(fam.num_states) >= 1.0)
        throw ConfigError("[mdp] min_probability: must be below 1 / states");
    const auto& vf = c.bounds.verify.family;
    if (vf.min_probability * static_cast<double>(vf.num_states) >= 1.0)
        throw ConfigError("[bounds] min_probability: must be below 1 / states");
    if (c.solver.kind == "phased-q" &&
        static_cast<long long>(c.solver.ell) * c.solver.m > 2000000000LL)
        throw ConfigError("[solver] m: ell * m must stay below 2e9");
}

}  // namespace

Config parse_config(std::string_view contents) {
    pt::ptree tree;
    std::istringstream in{std::string(contents)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config is not valid INI: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }
    Config config;
    const auto& table = schema();
    const auto apply = [&](const std::string& section, const std::string& key, const std::string& value) {
        const auto sec = table.find(section);
        if (sec == table.end()) throw ConfigError("unknown section [" + section + "]");
        const auto setter = sec->second.find(key);
        if (setter == sec->second.end())
            throw ConfigError((section.empty() ? "" : "[" + section + "] ") + key + ": unknown key");
        setter->second(config, Field{section, key, value});
    };
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            apply("", name, node.data());
            continue;
        }
        if (name.empty() || !table.count(name))
            throw ConfigError("unknown section [" + name + "]");
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty()) throw ConfigError("[" + name + "] " + key + ": nested keys are not allowed");
            apply(name, key, leaf.data());
        }
    }
    check_cross_fields(config);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(contents)));
    config.hash = hex;
    return config;
}

Config load_config(const std::string& path) {
    std::string contents;
    try {
        contents = text::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config(contents);
}

}  // namespace ilbrl::cli

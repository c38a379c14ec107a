#include "ilbrl_cli/pipeline.hpp"

#include "ilbrl/version.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace ilbrl::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Imitation learning by reinforcement learning: data generation, training, "
                 "offline selection, reporting and bound checks"};
    app.name("ilbrl");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "ilbrl-out";
    std::size_t workers = 1;
    std::string only_stage;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Master seed; every random stream is derived from it");
        sub->add_option("--out", out_dir, "Artifact directory");
        sub->add_option("--workers", workers, "Worker threads (results do not depend on it)")
            ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    };

    std::vector<std::pair<std::string, CLI::App*>> stage_commands;
    for (const char* name : {"generate-data", "label-rewards", "train", "evaluate-offline", "select",
                             "report", "verify-bounds"}) {
        auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " stage");
        add_common(sub);
        stage_commands.emplace_back(name, sub);
    }
    auto* run = app.add_subcommand("run", "Run the stages declared in the config, in order");
    add_common(run);
    run->add_option("--stage", only_stage, "Run only this stage")->check([](const std::string& s) {
        return is_stage(s) ? std::string() : "unknown stage '" + s + "'";
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    RunContext ctx;
    try {
        ctx.config = load_config(config_path);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
    ctx.seed = seed;
    ctx.out = out_dir;
    ctx.workers = workers;

    std::vector<std::string> stages;
    if (run->parsed())
        stages = only_stage.empty() ? ctx.config.stages : std::vector<std::string>{only_stage};
    for (const auto& [name, sub] : stage_commands)
        if (sub->parsed()) stages = {name};

    try {
        run_pipeline(ctx, stages);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << " (see " << (ctx.out / "failure.json").string() << ")\n";
        return 1;
    }
    for (const auto& s : stages) out << s << ": ok\n";
    return 0;
}

}  // namespace ilbrl::cli

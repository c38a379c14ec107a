#pragma once

#include "ilbrl_cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ilbrl::cli {

struct RunContext {
    Config config;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::size_t workers = 1;
};

/// Runs one stage, reading earlier artifacts from ctx.out and writing its
/// own there (aggregates at the top level, one file per cell under cells/).
/// Throws Error when a prerequisite artifact is missing or a stage fails.
void run_stage(const RunContext& ctx, const std::string& stage);

/// Runs `stages` in order. On failure, writes failure.json next to the
/// artifacts already produced and rethrows.
void run_pipeline(const RunContext& ctx, const std::vector<std::string>& stages);

/// Command-line entry point. Returns 0 on success, 1 when a stage fails and
/// 2 for usage or config errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ilbrl::cli

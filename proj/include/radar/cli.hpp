#pragma once

#include "radar/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace radar::cli {

/// Exit codes of the `radar` tool.
enum ExitCode : int {
    kOk = 0,
    kExpectationFailed = 1,
    kUsage = 2,
    kFailure = 3,
};

struct CliConfig {
    /// "list", "run", "immune optimize", "immune des", "ants run",
    /// "smallworld run", "growth run" or "fit".
    std::string subcommand;
    /// Experiment name for `run`, CSV path for `fit`.
    std::string target;
    std::optional<std::filesystem::path> config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::filesystem::path output_dir = "out";
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    /// Effective parameter tree: defaults, then the config file, then overrides.
    experiments::Params params = experiments::Params::object();
};

/// Parses arguments (without the program name) and resolves the parameter
/// tree. Throws UsageError, LookupError or CLI::ParseError.
CliConfig parse_args(std::span<const std::string> args);

/// Default parameter tree of a simulation subcommand.
experiments::Params subcommand_defaults(const std::string& subcommand);

/// Executes a parsed command; errors propagate as exceptions.
int execute(const CliConfig& config, std::ostream& out);

/// Full entry point: parse, execute, and map every error onto an exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace radar::cli

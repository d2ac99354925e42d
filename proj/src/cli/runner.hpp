#pragma once

#include <string>

#include "io/config.hpp"

namespace kinetic {

/// Exit codes shared by the CLI and the C API.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumeric = 3,
    kExitAcceptance = 4,
};

/**
 * One subcommand, one process: runs `command` with `config`, writing artifacts
 * under the resolved output directory. `summary_json` receives a short
 * machine-readable result. Returns kExitOk, or kExitAcceptance when
 * paper-suite finds a failing criterion; config/numeric problems surface as
 * ConfigError/NumericError/ContractError exceptions.
 */
int run_command(const std::string& command, const ExperimentConfig& config,
                const std::string& output_dir_override, std::string* summary_json);

/// Output directory resolution: override argument > KINETIC_OUTPUT_DIR > config.
std::string resolve_output_dir(const ExperimentConfig& config, const std::string& override_dir);

} // namespace kinetic

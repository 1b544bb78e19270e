#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace cascadecomp::cli {

enum class Command { synthesize, verify, simulate, spectrum };

enum ExitCode : int {
    exit_ok = 0,
    exit_validation = 1,
    exit_design = 2,
    exit_numerical = 3,
    exit_io = 4,
};

struct RunOutcome {
    int exit_code = exit_ok;
    std::string report; // human-readable summary, also the error text on failure
    std::vector<std::filesystem::path> artifacts;
};

int exit_code_for(ErrorKind kind);

// Exit status of a verify run: any failed check is a design failure.
int verify_status(const std::vector<Check>& checks);

/**
 * Runs one command on one scenario. Artifacts go to `out_dir`, or to the
 * config's output directory when absent. Library errors are caught and mapped
 * onto the exit-code contract; a verify run with any failed check exits with
 * the design code.
 */
RunOutcome run(Command cmd, const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {});

// Loads and runs one config file, mapping config errors onto exit codes too.
RunOutcome run_file(Command cmd, const std::filesystem::path& config,
                    const std::optional<std::filesystem::path>& out_dir = {});

// Runs several configs on at most `threads` workers; outcomes keep input order.
std::vector<RunOutcome> run_batch(Command cmd, const std::vector<std::filesystem::path>& configs,
                                  const std::optional<std::filesystem::path>& out_dir, unsigned threads);

} // namespace cascadecomp::cli

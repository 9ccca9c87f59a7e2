#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

namespace chunkstore::cli {

/// Subcommand names in the order `--help` lists them.
const std::vector<std::string>& command_names();

/// Runs one subcommand. JSON-lines records go to `out`, human-readable
/// progress and tables to `log`. Throws ConfigError for configuration
/// problems and chunkstore::Error for library failures.
void run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                 std::ostream& log);

/// Full command line: parses flags, loads --config, applies overrides and
/// dispatches. Returns 0 on success, 1 on a validation error, 2 on a runtime
/// error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chunkstore::cli

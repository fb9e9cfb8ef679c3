#pragma once

#include "medml/cli/run_config.hpp"

#include <ostream>

namespace medml::cli {

// Subcommands. Each computes everything first and then writes its files
// atomically; errors propagate as medml::Error.
void cmd_estimate(const RunConfig& cfg, std::ostream& out);
void cmd_simulate(const RunConfig& cfg, std::ostream& out);
void cmd_coverage(const RunConfig& cfg, std::ostream& out);
void cmd_bandwidth(const RunConfig& cfg, std::ostream& out);

// Full command line. Exit codes: 0 success (and --help), 2 configuration
// or usage error, 3 data error, 4 numerical error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace medml::cli

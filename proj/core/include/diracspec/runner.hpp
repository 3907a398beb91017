#pragma once

#include <string>
#include <vector>

#include "diracspec/config.hpp"

namespace dirac {

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 numeric anomaly (config errors throw)
  std::vector<std::string> artifacts;
  std::string message;
};

// Executes one subcommand against a validated configuration, writing CSV
// artifacts plus a JSON sidecar (config echo, version, summary) into the
// configured output directory. Throws ConfigError for unknown subcommands;
// numeric failures either throw NumericError/DomainError or return exit
// code 1 with the anomaly described in `message`.
RunResult run_command(const std::string& subcommand, const RunConfig& cfg);

const std::vector<std::string>& subcommand_names();

}  // namespace dirac

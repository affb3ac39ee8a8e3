#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdiv/config.hpp"
#include "pdiv/csv.hpp"

namespace pdiv {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitCertification = 4,
};

struct NamedTable {
  std::string name;  // file stem
  CsvTable table;
};

struct CommandResult {
  std::string command;
  std::vector<NamedTable> tables;  // the first one is <command>.csv
  std::vector<std::string> summary;
  nlohmann::json details = nlohmann::json::object();
  int exit_code = kExitOk;
};

CommandResult cmd_solve(const ExperimentConfig& cfg);
// Alternatives default to {0, b/2, 3b/2, 2b} around the optimum b, or
// {0.5, 1, 1.5, 2} when the optimum is 0.
CommandResult cmd_curve(const ExperimentConfig& cfg);
CommandResult cmd_fcurve(const ExperimentConfig& cfg);
CommandResult cmd_hjb(const ExperimentConfig& cfg);
CommandResult cmd_simulate(const ExperimentConfig& cfg);
CommandResult cmd_sweep(const ExperimentConfig& cfg);

CommandResult run_command(const std::string& name, const ExperimentConfig& cfg);
const std::vector<std::string>& command_names();

// Writes <out>/<table>.csv for every table, <out>/meta.json, and with
// `plot_script` a gnuplot script per table. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out,
                                                 const CommandResult& result,
                                                 const ExperimentConfig& cfg, bool plot_script);

}  // namespace pdiv

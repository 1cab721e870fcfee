#pragma once

#include <ostream>
#include <string>

#include "sgldv/cli/config.hpp"

namespace sgldv::cli {

struct CommandOptions {
  std::string out_dir = ".";
  int jobs = 1;
};

// Each command writes its files atomically into out_dir, prints a summary and
// returns the process exit code (0 success, 1 a check failed). Errors are
// thrown; exit_code_for maps them.
int cmd_run(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_schedule(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_kernel(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_check(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);

// 2 for configuration errors and missing constants, 3 for unsupported
// configurations, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace sgldv::cli

#pragma once

#include <string>

#include "kvflow/config.hpp"

namespace kvflow {

struct CliOptions {
  std::string config_path;
  std::string out_dir;  // overrides the config's output directory when set
  bool seed_set = false;
  unsigned long long seed = 0;
};

// Subcommand bodies. Each returns the process exit code: 0 success,
// 2 instability, 3 non-convergence, 4 verification failure. Configuration
// and usage problems throw ValidationError, which the CLI maps to 1.
int run_command(const CliOptions& opt);
int spectrum_command(const CliOptions& opt);
int err_command(const CliOptions& opt);
int verify_command(const std::string& which, const CliOptions& opt);
int plotdata_command(const CliOptions& opt);

}  // namespace kvflow

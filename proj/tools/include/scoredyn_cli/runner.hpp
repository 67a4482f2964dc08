#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scoredyn/dynamics.hpp"
#include "scoredyn_cli/config.hpp"

namespace scoredyn::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_certificate_failure = 1,
  exit_invalid_config = 2,
  exit_numeric_failure = 3,
};

struct RunOptions {
  /// Overrides config.output when non-empty.
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  /// Worker threads for sweeps; 0 means hardware concurrency. Outputs do not
  /// depend on it.
  unsigned threads = 0;
};

struct Certificate {
  std::string name;
  bool pass = false;
  double margin = 0.0;
};

struct RunResult {
  std::vector<Certificate> certificates;
  std::vector<std::string> artifacts;

  int exit_code() const;
};

/// Runs the configured experiment, writes its artifacts and prints one line
/// per certificate to `log`.
RunResult run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// Resolved parameters and derived constants; evaluates no kernels.
std::string describe(const ExperimentConfig& config);

/// %.17g
std::string format_double(double value);

/// Columns t, x_1..x_d, L, grad_norm, speed.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int d);

}  // namespace scoredyn::cli

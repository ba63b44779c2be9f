#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace eotlab::cli {

enum ExitCode : int { kOk = 0, kExecutionError = 1, kThresholdFailure = 2 };

struct RunOptions {
  /// Overrides the config's output directory when set.
  std::optional<std::string> out_dir;
  int threads = 1;
  bool verbose = false;
  /// solve only: eps to solve at (default: smallest eps of the schedule).
  std::optional<double> epsilon;
};

/// One (instance, eps) solve; writes solution.csv.
int cmd_solve(const ExperimentConfig& config, const RunOptions& options, std::ostream& err);
/// Full sweep; writes sweep.csv and summary.txt.
int cmd_sweep(const ExperimentConfig& config, const RunOptions& options, std::ostream& err);
/// Detachment certificates and the convex-ball bound; writes certificates.csv.
int cmd_detach(const ExperimentConfig& config, const RunOptions& options, std::ostream& err);
/// Collects every summary.txt under `directory` into report.csv there.
int cmd_report(const std::string& directory, std::ostream& out, std::ostream& err);

/// Writes through a temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace eotlab::cli

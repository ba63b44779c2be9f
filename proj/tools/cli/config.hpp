#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eotlab/domain.hpp"
#include "eotlab/instances.hpp"

namespace eotlab::cli {

// Inputs of the detach command: a named potential on a grid plus the
// convex-ball bound domain.
struct DetachConfig {
  /// quadratic [lambda] | power | clamped-linear [c]
  std::string potential = "quadratic";
  std::vector<double> potential_params;
  ConvexDomain domain = ConvexDomain::box({{0.0, 1.0}});
  int nodes = 401;
  ConvexDomain kernel = ConvexDomain::box({{0.0, 1.0}});
  double p = 2.0;
  double alpha = 1.0;
  /// Unset: measured from the grid.
  std::optional<double> lambda;
  std::optional<ConvexDomain> ball_domain;
  double ball_threshold = 0.0;
  int z_samples = 16;
  int r_samples = 16;
  long qmc_points = 100000;

  bool operator==(const DetachConfig&) const;
};

struct ExperimentConfig {
  InstanceDefinition instance;
  /// Strictly decreasing after parsing.
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<double> ps{2.0, 3.0};
  double subset_margin = 0.1;
  std::optional<double> beta;
  std::optional<std::array<double, 2>> cpt_window;
  double tol = 1e-9;
  long max_iter = 1'000'000;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::optional<DetachConfig> detach;

  bool operator==(const ExperimentConfig&) const;
};

/// Line-oriented format: `[section]` headers, `key = value` lines, `#`
/// comments. Sections: instance, sweep, output, detach. Lists are
/// whitespace separated. Missing keys take their defaults; `id = A`..`D`
/// preloads a built-in instance before the explicit keys apply.
///
/// Throws Error(Parse) with the line number for malformed lines and
/// Error(Validation) naming the key for bad or unknown keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& config);

}  // namespace eotlab::cli

#pragma once

#include <string>
#include <vector>

#include "eotlab/domain.hpp"
#include "eotlab/marginal.hpp"

namespace eotlab {

/// A pair of discretized marginals described by domain, density and grid
/// resolution. This is the [instance] block of an experiment config.
struct InstanceDefinition {
  std::string id;
  ConvexDomain source_domain = ConvexDomain::box({{0.0, 1.0}});
  ConvexDomain target_domain = ConvexDomain::box({{0.0, 1.0}});
  std::string source_density = "uniform";
  std::vector<double> source_params;
  std::string target_density = "uniform";
  std::vector<double> target_params;
  int resolution = 128;

  int dimension() const { return source_domain.dimension(); }
};

struct InstanceMarginals {
  MarginalPtr mu;
  MarginalPtr nu;
};

InstanceMarginals build_instance(const InstanceDefinition& def);

/// Built-in instances:
///   A  uniform (0,1) -> uniform (0,1)
///   B  uniform (0,1) -> uniform (0,2)
///   C  uniform (0,1)^2 -> uniform (0,1)^2
///   D  sine-perturbed (a = 0.3) on (0,1) -> uniform (0,1)
/// A resolution of 0 picks the default (128 in 1D, 12 per axis in 2D).
InstanceDefinition builtin_instance(const std::string& id, int resolution = 0);

}  // namespace eotlab

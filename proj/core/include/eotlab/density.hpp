#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eotlab/domain.hpp"

namespace eotlab {

/// A probability density (mass per unit volume) with certified two-sided
/// bounds lower <= f <= upper on its domain.
struct DensitySpec {
  std::function<double(std::span<const double>)> evaluator;
  double lower = 0.0;
  double upper = 0.0;
  /// Registry name and parameters, kept for reporting and round trips.
  std::string name;
  std::vector<double> params;

  double operator()(std::span<const double> x) const { return evaluator(x); }
};

/// Named density registry. Shapes are normalized to unit mass on `domain`
/// with a fine midpoint quadrature; bounds are derived analytically from the
/// shape parameters.
///
///   uniform
///   sine-perturbed  amplitude [frequency=1]   1 + a sin(2 pi k x_0)
///   linear          slope                     1 + s (x_0 - c_0)
///   gaussian-truncated  mean sigma            exp(-|x - mean|^2 / (2 sigma^2))
DensitySpec make_density(const std::string& name, const std::vector<double>& params,
                         const ConvexDomain& domain);

std::vector<std::string> density_names();

}  // namespace eotlab

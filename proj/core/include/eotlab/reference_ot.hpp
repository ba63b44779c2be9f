#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eotlab/density.hpp"
#include "eotlab/domain.hpp"
#include "eotlab/marginal.hpp"
#include "eotlab/network_simplex.hpp"
#include "eotlab/potential_field.hpp"

namespace eotlab {

enum class ReferenceMethod { Quantile1D, DiscreteLP };

std::string_view to_string(ReferenceMethod method) noexcept;

/// The eps = 0 objects: W2^2 (with cost |x-y|^2/2), the optimal plan, the
/// Brenier map T = grad u0 sampled at mu nodes, and Kantorovich potentials
/// u0 = |x|^2/2 - phi0, v0 = |y|^2/2 - psi0 in the gauge phi0(first node) = 0.
struct ReferenceSolution {
  double w2sq = 0.0;
  /// Row-major n_mu x dim; for non-map plans, the row barycenter.
  std::vector<double> map_values;
  PotentialField u0;
  PotentialField v0;
  ReferenceMethod method = ReferenceMethod::Quantile1D;
  std::vector<TransportEntry> plan;
  /// Primal minus dual of the discrete problem.
  double duality_gap = 0.0;
  std::vector<std::string> warnings;

  const DiscreteMarginal& mu() const { return u0.marginal(); }
  const DiscreteMarginal& nu() const { return v0.marginal(); }
  std::span<const double> map_at(std::size_t i) const {
    const auto d = static_cast<std::size_t>(mu().dimension());
    return {map_values.data() + i * d, d};
  }
};

/// Monotone rearrangement between the discrete CDFs (dimension 1 only).
ReferenceSolution solve_quantile_1d(const MarginalPtr& mu, const MarginalPtr& nu);

struct LpOptions {
  /// Maximum node count per marginal side.
  std::size_t max_nodes_per_side = 4096;
  double pivot_tol = 1e-12;
};

/// Discrete Monge-Kantorovich LP with cost |x-y|^2/2 solved exactly by
/// network simplex. v0 is taken from the LP duals.
ReferenceSolution solve_discrete_lp(const MarginalPtr& mu, const MarginalPtr& nu, const LpOptions& options = {});

/// max over interior nodes of |g(grad u0) det(D_h^2 u0) - f| using centered
/// second differences; a diagnostic for the Monge-Ampere equation.
double ma_residual(const ReferenceSolution& ref, const DensitySpec& f, const DensitySpec& g);

struct HolderFit {
  double alpha = 0.0;
  double constant = 0.0;
  std::size_t pairs = 0;
  /// Passive consistency check: min over (subset node, nu node) pairs of
  /// (u0 + v0 - <x,y>) / |y - T(x)|^p with p = (1 + alpha)/alpha.
  double implied_detachment = 0.0;
};

/// Least-squares slope of log|T(x) - T(y)| against log|x - y| over subset node
/// pairs separated by at least two grid spacings, clamped to (0, 1], and the
/// max ratio |T(x) - T(y)| / |x - y|^alpha at that slope.
HolderFit holder_exponent_u0(const ReferenceSolution& ref, const ConvexDomain& subset);

}  // namespace eotlab

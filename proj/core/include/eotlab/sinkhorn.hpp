#pragma once

#include <iosfwd>
#include <vector>

#include "eotlab/domain.hpp"
#include "eotlab/marginal.hpp"
#include "eotlab/potential_field.hpp"

namespace eotlab {

/// Converged Schrodinger pair (u_eps, v_eps) with u = |x|^2/2 - phi and
/// v = |y|^2/2 - psi. The plan has density exp((<x,y> - u(x) - v(y))/eps)
/// with respect to mu (x) nu.
struct EntropicSolution {
  PotentialField u;
  PotentialField v;
  double epsilon = 0.0;
  /// L1 distance of both plan marginals to (mu, nu), dimensionless mass.
  double marginal_residual = 0.0;
  long iterations = 0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<double> residual_trace;

  const DiscreteMarginal& mu() const { return u.marginal(); }
  const DiscreteMarginal& nu() const { return v.marginal(); }
};

struct SinkhornOptions {
  double tol = 1e-9;
  long max_iter = 1'000'000;
  /// A one-time warning goes to std::clog when this many iterations pass.
  long warn_iter = 100'000;
  /// Worker threads for the half-updates; results do not depend on it.
  int threads = 1;
  /// Optional CSV sink for (iteration, residual, dual_value) rows.
  std::ostream* trace_csv = nullptr;
};

/// Alternating log-domain updates
///   u(x_i) = eps log sum_j w_j exp((<x_i, y_j> - v_j)/eps)
///   v(y_j) = eps log sum_i w_i exp((<x_i, y_j> - u_i)/eps)
/// until the L1 marginal residual drops below tol. The v-equation holds
/// exactly on return; the u-equation holds up to the residual.
///
/// Starts from u = |x|^2/2 or, if `warm_start` is given, from its u values
/// (which must live on the same mu nodes).
EntropicSolution solve_schrodinger(const MarginalPtr& mu, const MarginalPtr& nu, double epsilon,
                                   const SinkhornOptions& options = {},
                                   const EntropicSolution* warm_start = nullptr);

/// Recomputes the L1 marginal residual of the induced plan from scratch.
double marginal_residual(const EntropicSolution& sol);

/// Shifts (u - d, v + d) with d = min over subset nodes of (u - u0), so that
/// u - u0 vanishes somewhere on the subset. Plan and gradients are unchanged.
EntropicSolution normalize_pair(const EntropicSolution& sol, const PotentialField& u0, const ConvexDomain& subset);

}  // namespace eotlab

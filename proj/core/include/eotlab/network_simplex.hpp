#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eotlab {

struct TransportEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

struct TransportResult {
  /// Basic arcs carrying strictly positive flow.
  std::vector<TransportEntry> flows;
  /// Duals with phi_i + psi_j <= cost_ij, gauge phi_0 = 0.
  std::vector<double> phi;
  std::vector<double> psi;
  double primal = 0.0;
  double dual = 0.0;
  long pivots = 0;
};

/// Exact balanced transportation problem on the complete bipartite graph:
///   min sum_ij cost_ij * pi_ij  s.t.  row sums = supply, column sums = demand.
/// `cost` is row-major (supply.size() x demand.size()).
///
/// Primal network simplex with an artificial root, block-search pricing and
/// the strongly feasible leaving-arc rule, so degenerate (assignment-like)
/// instances cannot cycle. Tree potentials are recomputed from the root after
/// every pivot, which keeps reduced costs free of accumulated drift.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost, double pivot_tol = 1e-12);

}  // namespace eotlab

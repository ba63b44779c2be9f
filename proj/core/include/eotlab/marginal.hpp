#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "eotlab/density.hpp"
#include "eotlab/domain.hpp"

namespace eotlab {

/// Quadrature discretization of mu = f dx: a tensor midpoint grid over the
/// domain's bounding box, clipped to the domain. Node coordinates are stored
/// row-major (node i occupies [i*dim, (i+1)*dim)).
class DiscreteMarginal {
 public:
  int dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  int resolution() const noexcept { return resolution_; }

  std::span<const double> node(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  const ConvexDomain& domain() const noexcept { return domain_; }
  const DensitySpec& density() const noexcept { return density_; }

  /// Pre-normalization mass sum(cell volume * f) and its distance from 1.
  double normalizer() const noexcept { return normalizer_; }
  double mass_defect() const noexcept { return std::abs(normalizer_ - 1.0); }
  double cell_volume() const noexcept { return cell_volume_; }

  /// Tensor grid metadata (full bounding-box grid, before clipping).
  std::span<const double> axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
  double spacing(int k) const { return spacing_[static_cast<std::size_t>(k)]; }
  /// Largest per-axis spacing; the "grid spacing" h used by tolerances.
  double grid_spacing() const noexcept;

  /// Node index for a tensor multi-index, or -1 if that cell was clipped.
  long node_at(std::span<const int> multi_index) const;
  /// Tensor multi-index of node i.
  std::vector<int> multi_index(std::size_t i) const;

  /// Axis-aligned box spanned by the node coordinates.
  bool in_node_box(std::span<const double> z, double tol = 1e-12) const;

  /// Indices of nodes lying in `subset` (closed, membership tolerance).
  std::vector<std::size_t> nodes_in(const ConvexDomain& subset) const;

  /// True when both marginals carry identical node coordinates.
  bool same_nodes(const DiscreteMarginal& other) const;

 private:
  friend std::shared_ptr<const DiscreteMarginal> build_marginal(const ConvexDomain&, const DensitySpec&, int);

  DiscreteMarginal(ConvexDomain domain, DensitySpec density) : domain_(std::move(domain)), density_(std::move(density)) {}

  ConvexDomain domain_;
  DensitySpec density_;
  int dim_ = 0;
  int resolution_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<std::vector<double>> axes_;
  std::vector<double> spacing_;
  std::vector<long> grid_to_node_;
  std::vector<std::size_t> node_to_grid_;
  double normalizer_ = 1.0;
  double cell_volume_ = 0.0;
};

using MarginalPtr = std::shared_ptr<const DiscreteMarginal>;

/// Midpoint-rule discretization with `resolution` cells per axis. Weights are
/// cell volume times density, renormalized to sum to one.
MarginalPtr build_marginal(const ConvexDomain& domain, const DensitySpec& density, int resolution);

/// Convenience: uniform density on a box.
MarginalPtr uniform_grid(const ConvexDomain& domain, int resolution);

}  // namespace eotlab

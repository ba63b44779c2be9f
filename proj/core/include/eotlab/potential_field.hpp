#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "eotlab/marginal.hpp"

namespace eotlab {

enum class PotentialKind { SchrodingerU, SchrodingerV, KantorovichU0, KantorovichV0, Generic };

std::string_view to_string(PotentialKind kind) noexcept;

/// Samples of one potential at the nodes of a marginal. Values are in units
/// of squared length (the scale of |x|^2/2). Off-node evaluation is
/// multilinear on the tensor grid; queries outside the node bounding box, or
/// whose interpolation cell has clipped corners, are rejected.
class PotentialField {
 public:
  PotentialField() = default;
  PotentialField(MarginalPtr marginal, std::vector<double> values, double epsilon, PotentialKind kind);

  static PotentialField from_function(MarginalPtr marginal, const std::function<double(std::span<const double>)>& fn,
                                      double epsilon = 0.0, PotentialKind kind = PotentialKind::Generic);

  const DiscreteMarginal& marginal() const { return *marginal_; }
  const MarginalPtr& marginal_ptr() const noexcept { return marginal_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double epsilon() const noexcept { return epsilon_; }
  PotentialKind kind() const noexcept { return kind_; }

  double evaluate(std::span<const double> z) const;

  /// Copy with a constant added to every value.
  PotentialField shifted(double delta) const;

 private:
  MarginalPtr marginal_;
  std::vector<double> values_;
  double epsilon_ = 0.0;
  PotentialKind kind_ = PotentialKind::Generic;
};

}  // namespace eotlab

#include "eotlab/potential_field.hpp"

#include <algorithm>
#include <cmath>

#include "eotlab/error.hpp"

namespace eotlab {

std::string_view to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::SchrodingerU: return "schrodinger-u";
    case PotentialKind::SchrodingerV: return "schrodinger-v";
    case PotentialKind::KantorovichU0: return "kantorovich-u0";
    case PotentialKind::KantorovichV0: return "kantorovich-v0";
    case PotentialKind::Generic: return "generic";
  }
  return "generic";
}

PotentialField::PotentialField(MarginalPtr marginal, std::vector<double> values, double epsilon, PotentialKind kind)
    : marginal_(std::move(marginal)), values_(std::move(values)), epsilon_(epsilon), kind_(kind) {
  if (!marginal_) throw Error(ErrorKind::Parameter, "potential field needs a marginal");
  if (values_.size() != marginal_->size())
    throw Error(ErrorKind::Parameter, "potential field size does not match its marginal");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::Parameter, "potential field has a non-finite value");
}

PotentialField PotentialField::from_function(MarginalPtr marginal,
                                             const std::function<double(std::span<const double>)>& fn,
                                             double epsilon, PotentialKind kind) {
  std::vector<double> values(marginal->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(marginal->node(i));
  return PotentialField(std::move(marginal), std::move(values), epsilon, kind);
}

double PotentialField::evaluate(std::span<const double> z) const {
  const auto& m = *marginal_;
  const int dim = m.dimension();
  if (!m.in_node_box(z))
    throw Error(ErrorKind::OutOfDomain, "query outside the node bounding box");

  std::vector<int> base(static_cast<std::size_t>(dim));
  std::vector<double> frac(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const auto ax = m.axis(k);
    const double h = m.spacing(k);
    const int last = static_cast<int>(ax.size()) - 1;
    double t = (z[static_cast<std::size_t>(k)] - ax.front()) / h;
    t = std::clamp(t, 0.0, static_cast<double>(last));
    int i0 = std::min(static_cast<int>(std::floor(t)), last - 1);
    i0 = std::max(i0, 0);
    base[static_cast<std::size_t>(k)] = i0;
    frac[static_cast<std::size_t>(k)] = t - i0;
  }

  double acc = 0.0;
  std::vector<int> corner(static_cast<std::size_t>(dim));
  const unsigned corners = 1U << dim;
  for (unsigned mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      const bool up = (mask >> k) & 1U;
      corner[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)] + (up ? 1 : 0);
      w *= up ? frac[static_cast<std::size_t>(k)] : 1.0 - frac[static_cast<std::size_t>(k)];
    }
    if (w == 0.0) continue;
    const long node = m.node_at(corner);
    if (node < 0) throw Error(ErrorKind::OutOfDomain, "interpolation cell touches a clipped node");
    acc += w * values_[static_cast<std::size_t>(node)];
  }
  return acc;
}

PotentialField PotentialField::shifted(double delta) const {
  std::vector<double> values = values_;
  for (double& v : values) v += delta;
  return PotentialField(marginal_, std::move(values), epsilon_, kind_);
}

}  // namespace eotlab

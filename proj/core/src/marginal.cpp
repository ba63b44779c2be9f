#include "eotlab/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eotlab/error.hpp"

namespace eotlab {

double DiscreteMarginal::grid_spacing() const noexcept {
  return spacing_.empty() ? 0.0 : *std::max_element(spacing_.begin(), spacing_.end());
}

long DiscreteMarginal::node_at(std::span<const int> multi_index) const {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int k = 0; k < dim_; ++k) {
    const int idx = multi_index[static_cast<std::size_t>(k)];
    if (idx < 0 || idx >= resolution_) return -1;
    flat += static_cast<std::size_t>(idx) * stride;
    stride *= static_cast<std::size_t>(resolution_);
  }
  return grid_to_node_[flat];
}

std::vector<int> DiscreteMarginal::multi_index(std::size_t i) const {
  std::vector<int> out(static_cast<std::size_t>(dim_));
  std::size_t rest = node_to_grid_[i];
  for (int k = 0; k < dim_; ++k) {
    out[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(resolution_));
    rest /= static_cast<std::size_t>(resolution_);
  }
  return out;
}

bool DiscreteMarginal::in_node_box(std::span<const double> z, double tol) const {
  if (static_cast<int>(z.size()) != dim_) return false;
  for (int k = 0; k < dim_; ++k) {
    const auto& ax = axes_[static_cast<std::size_t>(k)];
    if (z[k] < ax.front() - tol || z[k] > ax.back() + tol) return false;
  }
  return true;
}

std::vector<std::size_t> DiscreteMarginal::nodes_in(const ConvexDomain& subset) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (subset.contains(node(i))) out.push_back(i);
  return out;
}

bool DiscreteMarginal::same_nodes(const DiscreteMarginal& other) const {
  return dim_ == other.dim_ && coords_ == other.coords_;
}

MarginalPtr build_marginal(const ConvexDomain& domain, const DensitySpec& density, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::Parameter, "resolution must be at least 2");
  if (!density.evaluator) throw Error(ErrorKind::Parameter, "density has no evaluator");

  auto m = std::shared_ptr<DiscreteMarginal>(new DiscreteMarginal(domain, density));
  const int dim = domain.dimension();
  m->dim_ = dim;
  m->resolution_ = resolution;
  const auto bounds = domain.bounds();
  m->cell_volume_ = 1.0;
  for (int k = 0; k < dim; ++k) {
    const double h = (bounds[k].hi - bounds[k].lo) / resolution;
    std::vector<double> ax(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) ax[static_cast<std::size_t>(i)] = bounds[k].lo + (i + 0.5) * h;
    m->axes_.push_back(std::move(ax));
    m->spacing_.push_back(h);
    m->cell_volume_ *= h;
  }

  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(resolution);
  m->grid_to_node_.assign(total, -1);

  std::vector<double> z(static_cast<std::size_t>(dim));
  std::vector<double> raw;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int k = 0; k < dim; ++k) {
      z[static_cast<std::size_t>(k)] = m->axes_[static_cast<std::size_t>(k)][rest % static_cast<std::size_t>(resolution)];
      rest /= static_cast<std::size_t>(resolution);
    }
    if (!domain.contains(z)) continue;
    const double f = density(z);
    const double slack = 1e-12 * std::max(1.0, density.upper);
    if (!(f >= density.lower - slack && f <= density.upper + slack)) {
      std::ostringstream os;
      os.precision(17);
      os << "density " << f << " outside [" << density.lower << ", " << density.upper << "] at node (";
      for (int k = 0; k < dim; ++k) os << (k ? ", " : "") << z[static_cast<std::size_t>(k)];
      os << ")";
      throw Error(ErrorKind::BoundViolation, os.str());
    }
    m->grid_to_node_[flat] = static_cast<long>(m->node_to_grid_.size());
    m->node_to_grid_.push_back(flat);
    m->coords_.insert(m->coords_.end(), z.begin(), z.end());
    raw.push_back(m->cell_volume_ * f);
  }
  if (raw.empty()) throw Error(ErrorKind::DegenerateDomain, "no quadrature node falls inside the domain");

  double mass = 0.0;
  for (double w : raw) mass += w;  // fixed order
  m->normalizer_ = mass;
  m->weights_.resize(raw.size());
  m->log_weights_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    m->weights_[i] = raw[i] / mass;
    m->log_weights_[i] = std::log(m->weights_[i]);
  }
  return m;
}

MarginalPtr uniform_grid(const ConvexDomain& domain, int resolution) {
  return build_marginal(domain, make_density("uniform", {}, domain), resolution);
}

}  // namespace eotlab

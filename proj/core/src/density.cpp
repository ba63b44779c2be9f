#include "eotlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eotlab/error.hpp"

namespace eotlab {

namespace {

double domain_volume(const ConvexDomain& domain) {
  if (domain.is_box()) {
    double v = 1.0;
    for (const auto& iv : domain.as_box().axes) v *= iv.hi - iv.lo;
    return v;
  }
  if (domain.is_polygon()) {
    const auto& vs = domain.as_polygon().vertices;
    double a = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const auto& p = vs[i];
      const auto& q = vs[(i + 1) % vs.size()];
      a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::abs(a);
  }
  const auto& ball = domain.as_ball();
  const double n = static_cast<double>(domain.dimension());
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(ball.radius, n);
}

// Midpoint quadrature of `shape` over the domain on a fine tensor grid.
double integrate(const std::function<double(std::span<const double>)>& shape, const ConvexDomain& domain) {
  const int dim = domain.dimension();
  const auto bounds = domain.bounds();
  const int per_axis = dim == 1 ? 200000 : (dim == 2 ? 1000 : 64);
  std::size_t total = 1;
  double cell = 1.0;
  for (int k = 0; k < dim; ++k) {
    total *= static_cast<std::size_t>(per_axis);
    cell *= (bounds[k].hi - bounds[k].lo) / per_axis;
  }
  std::vector<double> z(dim);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int k = 0; k < dim; ++k) {
      const auto idx = rest % static_cast<std::size_t>(per_axis);
      rest /= static_cast<std::size_t>(per_axis);
      z[k] = bounds[k].lo + (static_cast<double>(idx) + 0.5) * (bounds[k].hi - bounds[k].lo) / per_axis;
    }
    if (domain.contains(z)) sum += shape(z);
  }
  return sum * cell;
}

void require_params(const std::string& name, const std::vector<double>& params, std::size_t lo, std::size_t hi) {
  if (params.size() < lo || params.size() > hi)
    throw Error(ErrorKind::Parameter, "density '" + name + "' takes " + std::to_string(lo) + "-" +
                                          std::to_string(hi) + " parameters");
}

}  // namespace

std::vector<std::string> density_names() {
  return {"uniform", "sine-perturbed", "linear", "gaussian-truncated"};
}

DensitySpec make_density(const std::string& name, const std::vector<double>& params,
                         const ConvexDomain& domain) {
  DensitySpec spec;
  spec.name = name;
  spec.params = params;
  const auto bounds = domain.bounds();

  if (name == "uniform") {
    require_params(name, params, 0, 0);
    const double value = 1.0 / domain_volume(domain);
    spec.evaluator = [value](std::span<const double>) { return value; };
    spec.lower = spec.upper = value;
    return spec;
  }

  std::function<double(std::span<const double>)> shape;
  double shape_lo = 0.0;
  double shape_hi = 0.0;
  if (name == "sine-perturbed") {
    require_params(name, params, 1, 2);
    const double a = params[0];
    const double k = params.size() > 1 ? params[1] : 1.0;
    if (!(std::abs(a) < 1.0)) throw Error(ErrorKind::Parameter, "sine-perturbed amplitude must satisfy |a| < 1");
    shape = [a, k](std::span<const double> x) { return 1.0 + a * std::sin(2.0 * std::numbers::pi * k * x[0]); };
    shape_lo = 1.0 - std::abs(a);
    shape_hi = 1.0 + std::abs(a);
  } else if (name == "linear") {
    require_params(name, params, 1, 1);
    const double s = params[0];
    const double c = 0.5 * (bounds[0].lo + bounds[0].hi);
    shape = [s, c](std::span<const double> x) { return 1.0 + s * (x[0] - c); };
    const double half = 0.5 * (bounds[0].hi - bounds[0].lo);
    shape_lo = 1.0 - std::abs(s) * half;
    shape_hi = 1.0 + std::abs(s) * half;
    if (!(shape_lo > 0.0)) throw Error(ErrorKind::Parameter, "linear density slope makes the density nonpositive");
  } else if (name == "gaussian-truncated") {
    require_params(name, params, 2, 2);
    const double mean = params[0];
    const double sigma = params[1];
    if (!(sigma > 0.0)) throw Error(ErrorKind::Parameter, "gaussian-truncated sigma must be positive");
    shape = [mean, sigma](std::span<const double> x) {
      double r2 = 0.0;
      for (double xi : x) r2 += (xi - mean) * (xi - mean);
      return std::exp(-r2 / (2.0 * sigma * sigma));
    };
    double far2 = 0.0;
    double near2 = 0.0;
    for (const auto& iv : bounds) {
      const double far = std::max(std::abs(iv.lo - mean), std::abs(iv.hi - mean));
      const double near = mean < iv.lo ? iv.lo - mean : (mean > iv.hi ? mean - iv.hi : 0.0);
      far2 += far * far;
      near2 += near * near;
    }
    shape_lo = std::exp(-far2 / (2.0 * sigma * sigma));
    shape_hi = std::exp(-near2 / (2.0 * sigma * sigma));
  } else {
    throw Error(ErrorKind::Parameter, "unknown density '" + name + "'");
  }

  const double z = integrate(shape, domain);
  if (!(z > 0.0)) throw Error(ErrorKind::DegenerateDomain, "density has zero mass on the domain");
  spec.evaluator = [shape, z](std::span<const double> x) { return shape(x) / z; };
  spec.lower = shape_lo / z;
  spec.upper = shape_hi / z;
  return spec;
}

}  // namespace eotlab

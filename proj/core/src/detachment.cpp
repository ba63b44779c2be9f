#include "eotlab/detachment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "eotlab/error.hpp"

namespace eotlab {

namespace {

constexpr double kYoungTol = 1e-9;

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

std::string format_point(std::span<const double> z) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t k = 0; k < z.size(); ++k) os << (k ? ", " : "") << z[k];
  os << ')';
  return os.str();
}

// Largest gradient jump from node i to a grid neighbour.
double gradient_spread(const DiscreteMarginal& m, const std::vector<Point>& grads, std::size_t i) {
  const auto idx = m.multi_index(i);
  double spread = 0.0;
  for (int k = 0; k < m.dimension(); ++k) {
    for (int step : {-1, 1}) {
      std::vector<int> q = idx;
      q[static_cast<std::size_t>(k)] += step;
      const long nb = m.node_at(q);
      if (nb >= 0) spread = std::max(spread, distance(grads[static_cast<std::size_t>(nb)], grads[i]));
    }
  }
  return spread;
}

// Pairs closer than two grid spacings (in x or in gradient space) to the
// coincidence set are skipped.
DetachmentCertificate scan_pairs(const PotentialField& u, const PotentialField& v,
                                 const std::vector<std::size_t>& k_nodes, const std::vector<Point>& grads, double p) {
  const auto& xs = u.marginal();
  const auto& ys = v.marginal();
  DetachmentCertificate cert;
  cert.p = p;
  cert.best_L = std::numeric_limits<double>::infinity();
  cert.min_young_residual = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double r = u[i] + v[j] - dot(xs.node(i), ys.node(j));
      cert.min_young_residual = std::min(cert.min_young_residual, r);
    }
  }
  if (cert.min_young_residual < -kYoungTol) {
    std::ostringstream os;
    os << "u(x) + v(y) - <x,y> = " << cert.min_young_residual << " < -1e-9";
    throw Error(ErrorKind::DualityViolation, os.str());
  }

  const double h = std::max(xs.grid_spacing(), ys.grid_spacing());
  for (const std::size_t i : k_nodes) {
    const auto x = xs.node(i);
    const double cutoff = 2.0 * std::max(h, gradient_spread(xs, grads, i));
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const auto y = ys.node(j);
      const double d = distance(y, grads[i]);
      if (d < cutoff) continue;
      const double ratio = (u[i] + v[j] - dot(x, y)) / std::pow(d, p);
      ++cert.sample_count;
      if (ratio < cert.best_L) {
        cert.best_L = ratio;
        cert.worst_x.assign(x.begin(), x.end());
        cert.worst_y.assign(y.begin(), y.end());
      }
    }
  }
  if (cert.sample_count == 0) throw Error(ErrorKind::InsufficientData, "no admissible (x, y) pairs");
  return cert;
}

}  // namespace

MarginalPtr gradient_image_grid(const std::vector<Point>& points, int resolution) {
  if (points.empty()) throw Error(ErrorKind::Parameter, "empty gradient sample");
  const std::size_t dim = points.front().size();
  std::vector<Interval> axes(dim, Interval{INFINITY, -INFINITY});
  for (const auto& g : points) {
    for (std::size_t k = 0; k < dim; ++k) {
      axes[k].lo = std::min(axes[k].lo, g[k]);
      axes[k].hi = std::max(axes[k].hi, g[k]);
    }
  }
  for (auto& iv : axes) {
    double h = (iv.hi - iv.lo) / (resolution - 1);
    if (!(h > 0.0)) h = 1e-3;
    iv.lo -= 0.5 * h;
    iv.hi += 0.5 * h;
  }
  return uniform_grid(ConvexDomain::box(std::move(axes)), resolution);
}

std::vector<double> legendre_values(const PotentialField& u, std::span<const Point> targets) {
  if (targets.empty()) throw Error(ErrorKind::Parameter, "empty target set");
  const auto& xs = u.marginal();
  std::vector<double> out(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) best = std::max(best, dot(targets[j], xs.node(i)) - u[i]);
    out[j] = best;
  }
  return out;
}

PotentialField legendre_transform(const PotentialField& u, const MarginalPtr& targets) {
  if (!targets || targets->size() == 0) throw Error(ErrorKind::Parameter, "empty target set");
  std::vector<Point> pts;
  pts.reserve(targets->size());
  for (std::size_t j = 0; j < targets->size(); ++j) {
    const auto y = targets->node(j);
    pts.emplace_back(y.begin(), y.end());
  }
  return PotentialField(targets, legendre_values(u, pts), 0.0, PotentialKind::Generic);
}

DetachmentCertificate check_p_detachment(const PotentialField& u, const PotentialField& v, const ConvexDomain& k,
                                         double p, const GradientFn& grad_u) {
  if (!(p >= 2.0)) throw Error(ErrorKind::Parameter, "detachment exponent must satisfy p >= 2");
  const auto k_nodes = u.marginal().nodes_in(k);
  std::vector<Point> grads(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) grads[i] = grad_u(u.marginal().node(i));
  return scan_pairs(u, v, k_nodes, grads, p);
}

Point grid_gradient(const PotentialField& u, std::size_t i) {
  const auto& m = u.marginal();
  const int dim = m.dimension();
  const auto idx = m.multi_index(i);
  Point g(static_cast<std::size_t>(dim), 0.0);
  for (int k = 0; k < dim; ++k) {
    auto value = [&](int offset) -> std::optional<double> {
      std::vector<int> q = idx;
      q[static_cast<std::size_t>(k)] += offset;
      const long node = m.node_at(q);
      if (node < 0) return std::nullopt;
      return u[static_cast<std::size_t>(node)];
    };
    const double h = m.spacing(k);
    const auto plus = value(1);
    const auto minus = value(-1);
    double gk = 0.0;
    if (plus && minus) {
      gk = (*plus - *minus) / (2.0 * h);
    } else if (plus) {
      const auto plus2 = value(2);
      gk = plus2 ? (-3.0 * u[i] + 4.0 * *plus - *plus2) / (2.0 * h) : (*plus - u[i]) / h;
    } else if (minus) {
      const auto minus2 = value(-2);
      gk = minus2 ? (3.0 * u[i] - 4.0 * *minus + *minus2) / (2.0 * h) : (u[i] - *minus) / h;
    } else {
      throw Error(ErrorKind::Resolution, "node has no neighbours along an axis");
    }
    g[static_cast<std::size_t>(k)] = gk;
  }
  return g;
}

TaylorBound measure_taylor_constant(const PotentialField& u, double alpha) {
  const auto& m = u.marginal();
  const double min_sep = 2.0 * m.grid_spacing();
  std::vector<Point> grads(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) grads[i] = grid_gradient(u, i);
  TaylorBound out;
  out.constant = -std::numeric_limits<double>::infinity();
  const auto dim = static_cast<std::size_t>(m.dimension());
  for (std::size_t a = 0; a < m.size(); ++a) {
    const auto x0 = m.node(a);
    for (std::size_t b = 0; b < m.size(); ++b) {
      if (a == b) continue;
      const auto x = m.node(b);
      const double d = distance(x, x0);
      if (d < min_sep) continue;
      double lin = 0.0;
      for (std::size_t k = 0; k < dim; ++k) lin += grads[a][k] * (x[k] - x0[k]);
      const double r = (u[b] - u[a] - lin) / std::pow(d, 1.0 + alpha);
      if (r > out.constant) {
        out.constant = r;
        out.worst_x0.assign(x0.begin(), x0.end());
        out.worst_x.assign(x.begin(), x.end());
      }
    }
  }
  if (!std::isfinite(out.constant)) throw Error(ErrorKind::InsufficientData, "no node pairs for the Taylor bound");
  return out;
}

double measure_lambda_h(const PotentialField& u, double alpha) {
  const double c = measure_taylor_constant(u, alpha).constant;
  return std::pow(std::max(c, 0.0) * (1.0 + alpha), 1.0 / (1.0 + alpha));
}

GlobalDetachmentResult global_detachment_forward(const PotentialField& u, double alpha, double lambda_h) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Parameter, "alpha must lie in (0, 1]");
  if (!(lambda_h > 0.0)) throw Error(ErrorKind::Parameter, "lambda_h must be positive");

  GlobalDetachmentResult out;
  out.taylor = measure_taylor_constant(u, alpha);
  const double nominal = std::pow(lambda_h, 1.0 + alpha) / (1.0 + alpha);
  if (out.taylor.constant > 1.05 * nominal) {
    std::ostringstream os;
    os << "measured growth constant " << out.taylor.constant << " exceeds lambda^(1+alpha)/(1+alpha) = " << nominal
       << " by more than 5% at x0 = " << format_point(out.taylor.worst_x0)
       << ", x = " << format_point(out.taylor.worst_x);
    throw Error(ErrorKind::Precondition, os.str());
  }

  const double p = (1.0 + alpha) / alpha;
  const auto& m = u.marginal();
  std::vector<std::size_t> all(m.size());
  std::vector<Point> grads(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    all[i] = i;
    grads[i] = grid_gradient(u, i);
  }
  const auto targets = gradient_image_grid(grads, m.resolution());
  const auto v = legendre_transform(u, targets);
  out.certificate = scan_pairs(u, v, all, grads, p);
  out.predicted_L = 1.0 / (p * std::pow(lambda_h, p));
  out.passed = out.certificate.best_L >= 0.9 * out.predicted_L;
  return out;
}

BallRatioResult convex_ball_lower_bound(const ConvexDomain& omega, int z_samples, int r_samples,
                                        std::size_t qmc_points, std::uint64_t seed) {
  if (z_samples < 16 || r_samples < 16) throw Error(ErrorKind::Parameter, "need at least 16 z and r samples");
  if (qmc_points == 0) throw Error(ErrorKind::Parameter, "need at least one quadrature point");
  const int dim = omega.dimension();
  if (dim > 8) throw Error(ErrorKind::Parameter, "dimension too large for the Halton bases");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shift(static_cast<std::size_t>(dim));
  for (auto& s : shift) s = unif(rng);

  // Unit-cube points [-1, 1]^n restricted to the unit ball.
  std::vector<double> pts;
  std::vector<double> norms;
  for (std::size_t q = 0; q < qmc_points; ++q) {
    double r2 = 0.0;
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      double t = radical_inverse(q + 1, kPrimes[k]) + shift[static_cast<std::size_t>(k)];
      t -= std::floor(t);
      p[static_cast<std::size_t>(k)] = 2.0 * t - 1.0;
      r2 += p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
    }
    if (r2 >= 1.0) continue;
    pts.insert(pts.end(), p.begin(), p.end());
    norms.push_back(std::sqrt(r2));
  }
  const double nd = static_cast<double>(dim);
  const double unit_ball = std::pow(std::numbers::pi, nd / 2.0) / std::tgamma(nd / 2.0 + 1.0);
  const double cube_over_ball = std::pow(2.0, nd) / unit_ball;

  std::vector<Point> zs = omega.boundary_samples(z_samples / 2);
  const auto bounds = omega.bounds();
  for (std::uint64_t q = 1; static_cast<int>(zs.size()) < z_samples && q < 1'000'000; ++q) {
    Point z(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      const double t = radical_inverse(q, kPrimes[(k + 3) % 10]);
      z[static_cast<std::size_t>(k)] = bounds[static_cast<std::size_t>(k)].lo +
                                       t * (bounds[static_cast<std::size_t>(k)].hi - bounds[static_cast<std::size_t>(k)].lo);
    }
    if (omega.contains(z)) zs.push_back(std::move(z));
  }

  BallRatioResult out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (const auto& z : zs) {
    for (int rk = 0; rk < r_samples; ++rk) {
      const double r = (rk + 1.0) / (r_samples + 1.0);
      double sum = 0.0;
      for (std::size_t q = 0; q < norms.size(); ++q) {
        for (int k = 0; k < dim; ++k)
          x[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(k)] + r * pts[q * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
        if (omega.contains(x)) sum += std::exp(-norms[q]);
      }
      const double ratio = cube_over_ball * sum / static_cast<double>(qmc_points);
      ++out.evaluations;
      if (ratio < out.min_ratio) {
        out.min_ratio = ratio;
        out.worst_z = z;
        out.worst_r = r;
      }
    }
  }
  return out;
}

}  // namespace eotlab

#include "eotlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eotlab/error.hpp"

namespace eotlab {

namespace {

constexpr double kDensityFloor = 1e-300;

double log_density(const EntropicSolution& sol, std::size_t i, std::size_t j) {
  return (dot(sol.mu().node(i), sol.nu().node(j)) - sol.u[i] - sol.v[j]) / sol.epsilon;
}

// Conditional law over the nodes of `side` given a point on the other side.
ConditionalMoments conditional(const DiscreteMarginal& side, const PotentialField& side_potential, double eps,
                               std::span<const double> z) {
  const std::size_t m = side.size();
  const auto dim = static_cast<std::size_t>(side.dimension());
  const auto lw = side.log_weights();
  std::vector<double> a(m);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = lw[j] + (dot(z, side.node(j)) - side_potential[j]) / eps;
    mx = std::max(mx, a[j]);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += std::exp(a[j] - mx);
  const double lse = mx + std::log(s);

  ConditionalMoments out;
  out.mean.assign(dim, 0.0);
  out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = std::exp(a[j] - lse);
    out.weight_sum += a[j];
    const auto y = side.node(j);
    for (std::size_t k = 0; k < dim; ++k) out.mean[k] += a[j] * y[k];
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto y = side.node(j);
    for (std::size_t k = 0; k < dim; ++k) {
      const double dk = y[k] - out.mean[k];
      for (std::size_t l = 0; l <= k; ++l) {
        out.covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += a[j] * dk * (y[l] - out.mean[l]);
      }
    }
  }
  for (std::size_t k = 0; k < dim; ++k)
    for (std::size_t l = 0; l < k; ++l)
      out.covariance(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
          out.covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  return out;
}

}  // namespace

double plan_density(const EntropicSolution& sol, std::span<const double> x, std::span<const double> y) {
  if (!sol.mu().in_node_box(x)) throw Error(ErrorKind::OutOfDomain, "x outside the mu node box");
  if (!sol.nu().in_node_box(y)) throw Error(ErrorKind::OutOfDomain, "y outside the nu node box");
  return std::exp((dot(x, y) - sol.u.evaluate(x) - sol.v.evaluate(y)) / sol.epsilon);
}

double plan_density_at(const EntropicSolution& sol, std::size_t i, std::size_t j) {
  return std::exp(log_density(sol, i, j));
}

double entropic_cost(const EntropicSolution& sol) {
  const auto& mu = sol.mu();
  const auto& nu = sol.nu();
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double lr = log_density(sol, i, j);
      const double rho = std::exp(lr);
      if (rho < kDensityFloor) continue;
      row += nu.weight(j) * rho * (0.5 * squared_distance(mu.node(i), nu.node(j)) + sol.epsilon * lr);
    }
    total += mu.weight(i) * row;
  }
  return total;
}

double transport_cost(const EntropicSolution& sol) {
  const auto& mu = sol.mu();
  const auto& nu = sol.nu();
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j)
      row += nu.weight(j) * plan_density_at(sol, i, j) * 0.5 * squared_distance(mu.node(i), nu.node(j));
    total += mu.weight(i) * row;
  }
  return total;
}

double dual_value(const DiscreteMarginal& mu, const DiscreteMarginal& nu, std::span<const double> phi,
                  std::span<const double> psi, double epsilon) {
  double linear = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) linear += mu.weight(i) * phi[i];
  for (std::size_t j = 0; j < nu.size(); ++j) linear += nu.weight(j) * psi[j];

  const auto lmu = mu.log_weights();
  const auto lnu = nu.log_weights();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      mx = std::max(mx, lmu[i] + lnu[j] +
                            (phi[i] + psi[j] - 0.5 * squared_distance(mu.node(i), nu.node(j))) / epsilon);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      s += std::exp(lmu[i] + lnu[j] + (phi[i] + psi[j] - 0.5 * squared_distance(mu.node(i), nu.node(j))) / epsilon -
                    mx);
  return linear - epsilon * std::exp(mx + std::log(s));
}

double dual_value(const EntropicSolution& sol) {
  const auto& mu = sol.mu();
  const auto& nu = sol.nu();
  std::vector<double> phi(mu.size());
  std::vector<double> psi(nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) phi[i] = 0.5 * dot(mu.node(i), mu.node(i)) - sol.u[i];
  for (std::size_t j = 0; j < nu.size(); ++j) psi[j] = 0.5 * dot(nu.node(j), nu.node(j)) - sol.v[j];
  return dual_value(mu, nu, phi, psi, sol.epsilon);
}

ConditionalMoments conditional_given_x(const EntropicSolution& sol, std::span<const double> x) {
  if (!sol.mu().in_node_box(x)) throw Error(ErrorKind::OutOfDomain, "x outside the mu node box");
  return conditional(sol.nu(), sol.v, sol.epsilon, x);
}

ConditionalMoments conditional_given_y(const EntropicSolution& sol, std::span<const double> y) {
  if (!sol.nu().in_node_box(y)) throw Error(ErrorKind::OutOfDomain, "y outside the nu node box");
  return conditional(sol.mu(), sol.u, sol.epsilon, y);
}

Point grad_u(const EntropicSolution& sol, std::span<const double> x) { return conditional_given_x(sol, x).mean; }

Point grad_v(const EntropicSolution& sol, std::span<const double> y) { return conditional_given_y(sol, y).mean; }

Eigen::MatrixXd hessian_u(const EntropicSolution& sol, std::span<const double> x) {
  return conditional_given_x(sol, x).covariance / sol.epsilon;
}

Eigen::MatrixXd hessian_v(const EntropicSolution& sol, std::span<const double> y) {
  return conditional_given_y(sol, y).covariance / sol.epsilon;
}

double u_from_equation(const EntropicSolution& sol, std::span<const double> x) {
  const auto& nu = sol.nu();
  const auto lw = nu.log_weights();
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> a(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) {
    a[j] = lw[j] + (dot(x, nu.node(j)) - sol.v[j]) / sol.epsilon;
    mx = std::max(mx, a[j]);
  }
  double s = 0.0;
  for (double aj : a) s += std::exp(aj - mx);
  return sol.epsilon * (mx + std::log(s));
}

GapDecomposition suboptimality_gap(const EntropicSolution& sol, const ReferenceSolution& ref) {
  if (!ref.mu().same_nodes(sol.mu()) || !ref.nu().same_nodes(sol.nu()))
    throw Error(ErrorKind::InstanceMismatch, "reference and entropic solution live on different nodes");
  GapDecomposition out;
  out.gap = entropic_cost(sol) - ref.w2sq;
  out.transport_gap = transport_cost(sol) - ref.w2sq;
  const auto& mu = sol.mu();
  const auto& nu = sol.nu();
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j)
      row += nu.weight(j) * plan_density_at(sol, i, j) * (ref.u0[i] + ref.v0[j] - dot(mu.node(i), nu.node(j)));
    total += mu.weight(i) * row;
  }
  out.detachment_integral = total;
  return out;
}

}  // namespace eotlab

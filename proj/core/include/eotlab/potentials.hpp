#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eotlab/domain.hpp"
#include "eotlab/reference_ot.hpp"
#include "eotlab/sinkhorn.hpp"

namespace eotlab {

/// Density of the Gibbs plan w.r.t. mu (x) nu, exp((<x,y> - u(x) - v(y))/eps).
/// Off-node points use the fields' multilinear interpolation.
double plan_density(const EntropicSolution& sol, std::span<const double> x, std::span<const double> y);
double plan_density_at(const EntropicSolution& sol, std::size_t i, std::size_t j);

/// sum_ij w_i w_j rho_ij (|x_i - y_j|^2/2 + eps log rho_ij), with 0 log 0 = 0
/// below rho = 1e-300.
double entropic_cost(const EntropicSolution& sol);
/// sum_ij w_i w_j rho_ij |x_i - y_j|^2/2 (no entropy term).
double transport_cost(const EntropicSolution& sol);

/// D_eps(phi, psi) = <phi, mu> + <psi, nu> - eps sum_ij w_i w_j exp((phi_i + psi_j - |x_i - y_j|^2/2)/eps).
double dual_value(const DiscreteMarginal& mu, const DiscreteMarginal& nu, std::span<const double> phi,
                  std::span<const double> psi, double epsilon);
double dual_value(const EntropicSolution& sol);

/// Moments of the conditional law of y given x under the Gibbs plan, with
/// u(x) recomputed from the first Schrodinger equation.
struct ConditionalMoments {
  double weight_sum = 0.0;
  Point mean;
  Eigen::MatrixXd covariance;
};

ConditionalMoments conditional_given_x(const EntropicSolution& sol, std::span<const double> x);
ConditionalMoments conditional_given_y(const EntropicSolution& sol, std::span<const double> y);

/// Conditional barycenter of y given x.
Point grad_u(const EntropicSolution& sol, std::span<const double> x);
Point grad_v(const EntropicSolution& sol, std::span<const double> y);
/// Conditional covariance divided by eps.
Eigen::MatrixXd hessian_u(const EntropicSolution& sol, std::span<const double> x);
Eigen::MatrixXd hessian_v(const EntropicSolution& sol, std::span<const double> y);

/// u_eps(x) = eps log sum_j w_j exp((<x, y_j> - v_j)/eps).
double u_from_equation(const EntropicSolution& sol, std::span<const double> x);

struct GapDecomposition {
  /// entropic_cost - W2^2.
  double gap = 0.0;
  /// transport_cost - W2^2 (the non-optimality of the entropic plan).
  double transport_gap = 0.0;
  /// sum_ij w_i w_j rho_ij (u0(x_i) + v0(y_j) - <x_i, y_j>).
  double detachment_integral = 0.0;
};

GapDecomposition suboptimality_gap(const EntropicSolution& sol, const ReferenceSolution& ref);

}  // namespace eotlab

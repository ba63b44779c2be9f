#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "eotlab/domain.hpp"
#include "eotlab/marginal.hpp"
#include "eotlab/potential_field.hpp"

namespace eotlab {

using GradientFn = std::function<Point(std::span<const double>)>;

/// Lower bound u(x) + v(y) - <x,y> >= best_L |y - grad u(x)|^p measured over
/// a finite sample of pairs.
struct DetachmentCertificate {
  double p = 2.0;
  double best_L = 0.0;
  Point worst_x;
  Point worst_y;
  std::size_t sample_count = 0;
  /// Smallest Young residual u(x) + v(y) - <x,y> over all node pairs.
  double min_young_residual = 0.0;
};

/// Exact discrete conjugate v(y) = max_x (<y, x> - u(x)) over the nodes of u.
PotentialField legendre_transform(const PotentialField& u, const MarginalPtr& targets);
std::vector<double> legendre_values(const PotentialField& u, std::span<const Point> targets);

/// Scans (K node, v node) pairs with |y - grad u(x)| >= 2 max(h, s(x)), where
/// h is the grid spacing and s(x) the largest jump of grad u to a grid
/// neighbour of x, and returns the minimal ratio. Throws a duality-violation
/// error if the Young residual is below -1e-9 anywhere.
DetachmentCertificate check_p_detachment(const PotentialField& u, const PotentialField& v, const ConvexDomain& k,
                                         double p, const GradientFn& grad_u);

/// Uniform grid over the bounding box of `points` whose nodes fall on the
/// lattice spanned by the extreme coordinates (an identity gradient maps
/// nodes onto nodes).
MarginalPtr gradient_image_grid(const std::vector<Point>& points, int resolution);

/// Centered finite-difference gradient of a grid potential at node i
/// (second-order one-sided stencils at the grid edges).
Point grid_gradient(const PotentialField& u, std::size_t i);

struct TaylorBound {
  /// max over node pairs (x0, x) of (u(x) - u(x0) - <grad u(x0), x - x0>) / |x - x0|^(1+alpha).
  double constant = 0.0;
  Point worst_x0;
  Point worst_x;
};

/// Empirical upper Taylor constant of a grid potential, using grid_gradient
/// and node pairs at least two grid spacings apart.
TaylorBound measure_taylor_constant(const PotentialField& u, double alpha);

/// lambda such that the measured Taylor constant equals lambda^(1+alpha)/(1+alpha).
double measure_lambda_h(const PotentialField& u, double alpha);

struct GlobalDetachmentResult {
  DetachmentCertificate certificate;
  /// 1 / (p lambda_h^p).
  double predicted_L = 0.0;
  TaylorBound taylor;
  bool passed = false;
};

/// Forward direction of the Holder/detachment equivalence: if u has
/// (1+alpha)-growth with constant lambda^(1+alpha)/(1+alpha), then (u, u*)
/// has p-detachment with p = (1+alpha)/alpha and L >= 1/(p lambda^p).
/// The growth precondition is verified first (5% slack); the bound is
/// accepted with 10% discretization slack. u* is evaluated on a grid over
/// the image of the finite-difference gradient.
GlobalDetachmentResult global_detachment_forward(const PotentialField& u, double alpha, double lambda_h);

struct BallRatioResult {
  double min_ratio = 0.0;
  Point worst_z;
  double worst_r = 0.0;
  std::size_t evaluations = 0;
};

/// min over sampled z in closure(omega) and r in (0,1) of
///   int_{omega cap B_r(z)} exp(-|x - z|/r) dx / |B_r(z)|
/// by randomized-shift Halton quadrature with `qmc_points` points per (z, r).
BallRatioResult convex_ball_lower_bound(const ConvexDomain& omega, int z_samples, int r_samples,
                                        std::size_t qmc_points = 100000, std::uint64_t seed = 0);

}  // namespace eotlab

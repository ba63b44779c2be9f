#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eotlab/detachment.hpp"
#include "eotlab/error.hpp"

using namespace eotlab;

namespace {

MarginalPtr interval(double lo, double hi, int n) { return uniform_grid(ConvexDomain::box({{lo, hi}}), n); }

double power_u(double x) { return 2.0 / 3.0 * std::pow(std::abs(x), 1.5); }
Point power_grad(std::span<const double> x) {
  return {x[0] == 0.0 ? 0.0 : std::copysign(std::sqrt(std::abs(x[0])), x[0])};
}

struct GridPair {
  PotentialField u;
  PotentialField v;
  GradientFn grad;
};

// u on the given grid, v its discrete conjugate on the lattice-aligned image
// of the exact gradient.
GridPair conjugate_pair(const MarginalPtr& grid, const std::function<double(double)>& f, GradientFn grad) {
  const auto u = PotentialField::from_function(grid, [&](std::span<const double> x) { return f(x[0]); });
  std::vector<Point> g(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) g[i] = grad(grid->node(i));
  const auto v = legendre_transform(u, gradient_image_grid(g, static_cast<int>(grid->size())));
  return {u, v, std::move(grad)};
}

std::size_t node_index(const DiscreteMarginal& m, std::span<const double> z) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (distance(m.node(i), z) == 0.0) return i;
  ADD_FAILURE() << "point is not a node";
  return 0;
}

void expect_sound(const DetachmentCertificate& c, const GridPair& g) {
  const std::size_t i = node_index(g.u.marginal(), c.worst_x);
  const std::size_t j = node_index(g.v.marginal(), c.worst_y);
  const double slack = g.u[i] + g.v[j] - dot(c.worst_x, c.worst_y);
  const double ratio = slack / std::pow(distance(c.worst_y, g.grad(c.worst_x)), c.p);
  EXPECT_NEAR(ratio, c.best_L, 1e-12);
  EXPECT_GE(c.min_young_residual, -1e-9);
}

// Ratio of the integral of exp(-|x - z|/r) over omega cap B_r(z) to |B_r(z)|
// by plain Monte Carlo with uniform points in the ball.
double mc_ball_ratio(const ConvexDomain& omega, const Point& z, double r, int n) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sum = 0.0;
  int accepted = 0;
  const std::size_t dim = z.size();
  Point x(dim);
  Point q(dim);
  while (accepted < n) {
    double s = 0.0;
    for (double& c : q) {
      c = u(rng);
      s += c * c;
    }
    if (s >= 1.0) continue;
    ++accepted;
    for (std::size_t k = 0; k < dim; ++k) x[k] = z[k] + r * q[k];
    if (omega.contains(x)) sum += std::exp(-std::sqrt(s));
  }
  return sum / n;
}

}  // namespace

TEST(Legendre, QuadraticIsSelfConjugate) {
  const auto grid = interval(0.0, 1.0, 401);
  const double h = grid->grid_spacing();
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  const auto v = legendre_transform(u, interval(0.05, 0.95, 91));
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double y = v.marginal().node(j)[0];
    EXPECT_NEAR(v[j], 0.5 * y * y, h * h);
  }
}

TEST(Legendre, LinearConjugate) {
  const auto grid = interval(0.0, 1.0, 401);
  const double h = grid->grid_spacing();
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.7 * x[0]; });
  std::vector<Point> ys;
  for (double y = 0.0; y <= 1.5; y += 0.05) ys.push_back({y});
  const auto v = legendre_values(u, ys);
  for (std::size_t j = 0; j < ys.size(); ++j) EXPECT_NEAR(v[j], std::max(ys[j][0] - 0.7, 0.0), h);
}

TEST(Legendre, PowerConjugateMatchesBruteForceOracle) {
  const auto grid = interval(-1.0, 1.0, 801);
  const double h = grid->grid_spacing();
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return power_u(x[0]); });
  std::vector<Point> ys;
  for (int k = -20; k <= 20; ++k) ys.push_back({0.045 * k});
  const auto v = legendre_values(u, ys);
  const int n = 1'000'000;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double y = ys[j][0];
    double oracle = -1e300;
    for (int i = 0; i <= n; ++i) {
      const double x = -1.0 + 2.0 * i / n;
      oracle = std::max(oracle, x * y - power_u(x));
    }
    EXPECT_NEAR(oracle, std::pow(std::abs(y), 3) / 3.0, 1e-9);
    EXPECT_NEAR(v[j], oracle, 2.0 * std::pow(h, 1.5));
  }
}

TEST(Legendre, EmptyTargetsRejected) {
  const auto grid = interval(0.0, 1.0, 11);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return x[0]; });
  try {
    (void)legendre_values(u, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parameter);
  }
}

TEST(Legendre, YoungInequalityAndDoubleConjugate) {
  const auto grid = interval(-1.0, 1.0, 201);
  const double h = grid->grid_spacing();
  const std::vector<std::pair<std::function<double(double)>, GradientFn>> fns{
      {[](double x) { return x * x * x * x + 0.3 * x; }, [](std::span<const double> x) { return Point{4 * std::pow(x[0], 3) + 0.3}; }},
      {power_u, power_grad},
      {[](double x) { return std::exp(x); }, [](std::span<const double> x) { return Point{std::exp(x[0])}; }},
  };
  for (const auto& [f, g] : fns) {
    const auto pair = conjugate_pair(grid, f, g);
    for (std::size_t i = 0; i < pair.u.size(); ++i)
      for (std::size_t j = 0; j < pair.v.size(); ++j)
        ASSERT_GE(pair.u[i] + pair.v[j] - dot(grid->node(i), pair.v.marginal().node(j)), -1e-9);
    const auto back = legendre_transform(pair.v, grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      EXPECT_LE(back[i], pair.u[i] + 1e-9);
      EXPECT_GE(back[i], pair.u[i] - 2 * h * 2.0);
    }
  }
}

TEST(CheckDetachment, QuadraticHalf) {
  const auto grid = interval(0.0, 1.0, 201);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  const auto v = PotentialField::from_function(grid, [](std::span<const double> y) { return 0.5 * y[0] * y[0]; });
  const GradientFn id = [](std::span<const double> x) { return Point(x.begin(), x.end()); };
  const auto c = check_p_detachment(u, v, ConvexDomain::box({{0.1, 0.9}}), 2.0, id);
  EXPECT_NEAR(c.best_L, 0.5, 1e-6);
  EXPECT_GT(c.sample_count, 0u);
  expect_sound(c, {u, v, id});
}

TEST(CheckDetachment, SteeperQuadraticQuarter) {
  const auto xs = interval(0.0, 1.0, 201);
  const auto ys = interval(0.0, 2.0, 201);
  const auto u = PotentialField::from_function(xs, [](std::span<const double> x) { return x[0] * x[0]; });
  const auto v = PotentialField::from_function(ys, [](std::span<const double> y) { return 0.25 * y[0] * y[0]; });
  const GradientFn g = [](std::span<const double> x) { return Point{2.0 * x[0]}; };
  const auto c = check_p_detachment(u, v, ConvexDomain::box({{0.1, 0.9}}), 2.0, g);
  EXPECT_NEAR(c.best_L, 0.25, 1e-6);
}

TEST(CheckDetachment, PowerPotentialAtThirdPower) {
  const auto pair = conjugate_pair(interval(-1.0, 1.0, 801), power_u, power_grad);
  const auto c = check_p_detachment(pair.u, pair.v, ConvexDomain::box({{-0.5, 0.5}}), 3.0, pair.grad);
  EXPECT_GT(c.best_L, 0.0);
  EXPECT_LE(c.best_L, 1.0 / 3.0 + 1e-3);
  expect_sound(c, pair);
}

TEST(CheckDetachment, Errors) {
  const auto grid = interval(0.0, 1.0, 11);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  const GradientFn id = [](std::span<const double> x) { return Point(x.begin(), x.end()); };
  const auto k = ConvexDomain::box({{0.1, 0.9}});
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Internal;
  };
  EXPECT_EQ(kind_of([&] { check_p_detachment(u, u, k, 1.5, id); }), ErrorKind::Parameter);
  const auto low = PotentialField::from_function(grid, [](std::span<const double> y) { return 0.5 * y[0] * y[0] - 0.01; });
  EXPECT_EQ(kind_of([&] { check_p_detachment(u, low, k, 2.0, id); }), ErrorKind::DualityViolation);
  const auto near = interval(0.49, 0.51, 2);
  const auto vn = PotentialField::from_function(near, [](std::span<const double> y) { return 0.5 * y[0] * y[0]; });
  EXPECT_EQ(kind_of([&] { check_p_detachment(u, vn, ConvexDomain::box({{0.45, 0.55}}), 2.0, id); }),
            ErrorKind::InsufficientData);
}

TEST(CheckDetachment, ScalingCovariance) {
  // s u(x / s) with u = x^2/2 has detachment constant s/2 at p = 2.
  for (double s : {0.5, 2.0}) {
    const auto grid = interval(0.0, s, 401);
    const auto pair = conjugate_pair(grid, [s](double x) { return 0.5 * x * x / s; },
                                     [s](std::span<const double> x) { return Point{x[0] / s}; });
    const auto c = check_p_detachment(pair.u, pair.v, grid->domain(), 2.0, pair.grad);
    EXPECT_NEAR(c.best_L, 0.5 * s, 1e-6 * s) << "s = " << s;
  }
}

TEST(GlobalDetachment, QuadraticUnitLambda) {
  const auto grid = interval(0.0, 1.0, 401);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  const auto r = global_detachment_forward(u, 1.0, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.predicted_L, 0.5);
  EXPECT_NEAR(r.certificate.best_L, 0.5, 1e-4);
  EXPECT_GE(r.certificate.best_L, 0.45);
}

TEST(GlobalDetachment, PowerWithMeasuredLambda) {
  const auto grid = interval(-1.0, 1.0, 801);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return power_u(x[0]); });
  const double lambda = measure_lambda_h(u, 0.5);
  const auto r = global_detachment_forward(u, 0.5, lambda);
  EXPECT_DOUBLE_EQ(r.certificate.p, 3.0);
  EXPECT_NEAR(r.predicted_L, 1.0 / (3.0 * std::pow(lambda, 3)), 1e-15);
  EXPECT_TRUE(r.passed) << r.certificate.best_L << " vs " << r.predicted_L;
}

TEST(GlobalDetachment, ClampedLinearWithMeasuredLambda) {
  const double c = 0.5;
  const auto grid = interval(-1.0, 1.0, 401);
  const auto u = PotentialField::from_function(grid, [c](std::span<const double> x) {
    const double r = std::abs(x[0]);
    return r <= c ? 0.5 * r * r : c * r - 0.5 * c * c;
  });
  const double lambda = measure_lambda_h(u, 1.0);
  EXPECT_NEAR(lambda, 1.0, 0.05);
  const auto r = global_detachment_forward(u, 1.0, lambda);
  EXPECT_TRUE(r.passed) << r.certificate.best_L << " vs " << r.predicted_L;
}

TEST(GlobalDetachment, GrowthPreconditionViolated) {
  const auto grid = interval(-1.0, 1.0, 801);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return power_u(x[0]); });
  try {
    (void)global_detachment_forward(u, 0.5, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    EXPECT_NE(std::string(e.what()).find("x0 ="), std::string::npos);
  }
  EXPECT_THROW((void)global_detachment_forward(u, 1.5, 1.0), Error);
}

TEST(GridGradient, ExactForQuadratics) {
  const auto grid = uniform_grid(ConvexDomain::box({{0.0, 1.0}, {0.0, 2.0}}), 20);
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return x[0] * x[0] + 3 * x[0] * x[1] - x[1] * x[1]; });
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto x = grid->node(i);
    const auto g = grid_gradient(u, i);
    EXPECT_NEAR(g[0], 2 * x[0] + 3 * x[1], 1e-10);
    EXPECT_NEAR(g[1], 3 * x[0] - 2 * x[1], 1e-10);
  }
}

TEST(BallBound, UnitSquareAboveFloor) {
  const auto sq = ConvexDomain::box({{0.0, 1.0}, {0.0, 1.0}});
  const auto r = convex_ball_lower_bound(sq, 16, 16);
  EXPECT_GE(r.min_ratio, 0.05);
  EXPECT_EQ(r.evaluations, 256u);
  const double oracle = mc_ball_ratio(sq, r.worst_z, r.worst_r, 1'000'000);
  EXPECT_NEAR(r.min_ratio, oracle, 0.02 * oracle);
}

TEST(BallBound, DiskCenterPointwiseFloor) {
  const auto disk = ConvexDomain::ball({0.0, 0.0}, 1.0);
  const double centered = mc_ball_ratio(disk, {0.0, 0.0}, 0.5, 1'000'000);
  EXPECT_GE(centered, std::exp(-1.0));
  // Closed form for a ball fully inside the domain: 2 (1 - 2/e).
  EXPECT_NEAR(centered, 2.0 * (1.0 - 2.0 / std::numbers::e), 2e-3);
  const auto r = convex_ball_lower_bound(disk, 16, 16);
  EXPECT_GT(r.min_ratio, 0.0);
  EXPECT_LE(r.min_ratio, centered);
}

TEST(BallBound, ThinRectangleStableUnderRefinement) {
  const auto thin = ConvexDomain::box({{0.0, 1.0}, {0.0, 0.05}});
  const auto a = convex_ball_lower_bound(thin, 16, 16, 100000);
  const auto b = convex_ball_lower_bound(thin, 16, 16, 200000);
  EXPECT_GT(a.min_ratio, 0.0);
  EXPECT_NEAR(b.min_ratio, a.min_ratio, 0.1 * a.min_ratio);
}

TEST(BallBound, DeterministicForSeed) {
  const auto sq = ConvexDomain::box({{0.0, 1.0}, {0.0, 1.0}});
  EXPECT_EQ(convex_ball_lower_bound(sq, 16, 16, 20000, 3).min_ratio,
            convex_ball_lower_bound(sq, 16, 16, 20000, 3).min_ratio);
}

TEST(BallBound, SampleCountsValidated) {
  const auto sq = ConvexDomain::box({{0.0, 1.0}, {0.0, 1.0}});
  EXPECT_THROW((void)convex_ball_lower_bound(sq, 8, 16), Error);
  EXPECT_THROW((void)convex_ball_lower_bound(sq, 16, 4), Error);
}

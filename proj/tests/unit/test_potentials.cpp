#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "eotlab/error.hpp"
#include "eotlab/instances.hpp"
#include "eotlab/potentials.hpp"
#include "eotlab/reference_ot.hpp"
#include "eotlab/sinkhorn.hpp"

using namespace eotlab;

namespace {

const InstanceMarginals& instance(const std::string& id) {
  static std::map<std::string, InstanceMarginals> cache;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, build_instance(builtin_instance(id))).first;
  return it->second;
}

const EntropicSolution& solved(const std::string& id, double eps) {
  static std::map<std::pair<std::string, double>, EntropicSolution> cache;
  const auto key = std::make_pair(id, eps);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto& inst = instance(id);
    it = cache.emplace(key, solve_schrodinger(inst.mu, inst.nu, eps)).first;
  }
  return it->second;
}

const ReferenceSolution& reference(const std::string& id) {
  static std::map<std::string, ReferenceSolution> cache;
  auto it = cache.find(id);
  if (it == cache.end()) {
    const auto& inst = instance(id);
    it = cache.emplace(id, inst.mu->dimension() == 1 ? solve_quantile_1d(inst.mu, inst.nu)
                                                     : solve_discrete_lp(inst.mu, inst.nu))
             .first;
  }
  return it->second;
}

double plan_mass(const EntropicSolution& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.mu().size(); ++i)
    for (std::size_t j = 0; j < s.nu().size(); ++j) m += s.mu().weight(i) * s.nu().weight(j) * plan_density_at(s, i, j);
  return m;
}

Point at(double x) { return {x}; }

}  // namespace

TEST(PlanDensity, UnitMassAndPositive) {
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& s = solved(id, 0.05);
    EXPECT_NEAR(plan_mass(s), 1.0, 1e-8) << id;
    for (std::size_t i = 0; i < s.mu().size(); i += 7)
      for (std::size_t j = 0; j < s.nu().size(); j += 5) EXPECT_GE(plan_density_at(s, i, j), 0.0);
  }
}

TEST(PlanDensity, ConcentratesNearDiagonal) {
  const auto& s = solved("A", 0.01);
  EXPECT_LT(plan_density(s, at(0.5), at(0.9)), plan_density(s, at(0.5), at(0.5)));
}

TEST(PlanDensity, MatchesRawFormulaAtNodes) {
  const auto& s = solved("A", 0.05);
  const std::size_t i = 32;  // x = 0.2539..., the node nearest 0.25
  const double x = s.mu().node(i)[0];
  const double direct = std::exp((x * x - s.u.values()[i] - s.v.values()[i]) / 0.05);
  EXPECT_NEAR(plan_density_at(s, i, i), direct, 1e-12 * direct);
  EXPECT_NEAR(plan_density(s, at(x), at(x)), direct, 1e-12 * direct);
}

TEST(PlanDensity, RejectsOutOfDomain) {
  const auto& s = solved("A", 0.05);
  try {
    (void)plan_density(s, at(1.5), at(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
  EXPECT_THROW((void)grad_u(s, at(-0.5)), Error);
}

TEST(EntropicCost, DecreasesTowardZeroOnIdentity) {
  const double c1 = entropic_cost(solved("A", 0.2));
  const double c2 = entropic_cost(solved("A", 0.1));
  const double c3 = entropic_cost(solved("A", 0.05));
  EXPECT_GT(c1, c2);
  EXPECT_GT(c2, c3);
  EXPECT_GT(c3, 0.0);
}

TEST(EntropicCost, BoundedBelowByReference) {
  for (const char* id : {"A", "B", "C", "D"}) EXPECT_GE(entropic_cost(solved(id, 0.05)), reference(id).w2sq - 1e-8) << id;
}

TEST(EntropicCost, ExpansionWindowOnDilation) {
  const double eps = 0.05;
  const double w2 = reference("B").w2sq;
  EXPECT_NEAR(w2, 1.0 / 6.0, 2.0 * std::pow(1.0 / 128.0, 2));
  const double c = entropic_cost(solved("B", eps));
  EXPECT_GE(c, w2);
  EXPECT_LE(c, w2 + 1.5 * eps * std::log(1.0 / eps));
}

TEST(DualValue, OptimalityIdentity) {
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& s = solved(id, 0.05);
    const double cost = entropic_cost(s);
    EXPECT_NEAR(dual_value(s) + s.epsilon, cost, 10 * 1e-9 * (1 + std::abs(cost))) << id;
  }
}

TEST(DualValue, ShiftInvariant) {
  const auto& s = solved("B", 0.05);
  std::vector<double> phi(s.mu().size());
  std::vector<double> psi(s.nu().size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = 0.5 * std::pow(s.mu().node(i)[0], 2) - s.u[i];
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = 0.5 * std::pow(s.nu().node(j)[0], 2) - s.v[j];
  const double base = dual_value(s.mu(), s.nu(), phi, psi, 0.05);
  for (double& p : phi) p += 0.7;
  for (double& p : psi) p -= 0.7;
  EXPECT_NEAR(dual_value(s.mu(), s.nu(), phi, psi, 0.05), base, 1e-12);
}

TEST(DualValue, ZeroPotentialsMatchBruteForce) {
  const auto& inst = instance("A");
  const std::vector<double> phi(inst.mu->size(), 0.0);
  const std::vector<double> psi(inst.nu->size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < inst.mu->size(); ++i)
    for (std::size_t j = 0; j < inst.nu->size(); ++j) {
      const double d = inst.mu->node(i)[0] - inst.nu->node(j)[0];
      sum += inst.mu->weight(i) * inst.nu->weight(j) * std::exp(-0.5 * d * d);
    }
  EXPECT_NEAR(dual_value(*inst.mu, *inst.nu, phi, psi, 1.0), -sum, 1e-12);
}

TEST(GradU, SymmetricMidpoint) {
  EXPECT_NEAR(grad_u(solved("A", 0.05), at(0.5))[0], 0.5, 1e-10);
  EXPECT_NEAR(grad_v(solved("A", 0.05), at(0.5))[0], 0.5, 1e-10);
}

TEST(GradU, ApproachesReferenceMapAtSmallEpsilon) {
  EXPECT_NEAR(grad_u(solved("A", 0.005), at(0.3))[0], 0.3, 0.02);
}

TEST(GradV, ApproachesInverseMapAtSmallEpsilon) {
  EXPECT_NEAR(grad_v(solved("B", 0.005), at(1.0))[0], 0.5, 0.03);
}

TEST(GradU, BarycenterLiesInNodeHull) {
  for (const char* id : {"B", "D"}) {
    const auto& s = solved(id, 0.02);
    for (double x = 0.01; x < 1.0; x += 0.07) {
      const double g = grad_u(s, at(x))[0];
      EXPECT_GE(g, s.nu().node(0)[0]);
      EXPECT_LE(g, s.nu().node(s.nu().size() - 1)[0]);
    }
    for (double y = 0.01; y < s.nu().node(s.nu().size() - 1)[0]; y += 0.07) {
      const double g = grad_v(s, at(y))[0];
      EXPECT_GE(g, s.mu().node(0)[0]);
      EXPECT_LE(g, s.mu().node(s.mu().size() - 1)[0]);
    }
  }
}

TEST(ConditionalMoments, WeightsSumToOne) {
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& s = solved(id, 0.02);
    for (std::size_t i = 0; i < s.mu().size(); i += 5) {
      const auto x = s.mu().node(i);
      EXPECT_NEAR(conditional_given_x(s, x).weight_sum, 1.0, 1e-12);
    }
  }
}

TEST(HessianU, SymmetricPsdAndBounded) {
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& s = solved(id, 0.02);
    const double diam = diameter(s.nu().domain());
    for (std::size_t i = 0; i < s.mu().size(); i += 3) {
      const auto h = hessian_u(s, s.mu().node(i));
      EXPECT_EQ((h - h.transpose()).norm(), 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
      EXPECT_LE(h.trace(), diam * diam / (4 * s.epsilon));
    }
  }
}

TEST(HessianU, ProductPlanLimit) {
  const auto& s = solved("A", 10.0);
  for (double x : {0.2, 0.5, 0.8}) EXPECT_NEAR(hessian_u(s, at(x))(0, 0), 1.0 / 120.0, 0.1 / 120.0);
}

TEST(HessianU, MatchesFiniteDifferenceOfGradient) {
  const double h = 1e-4;
  auto check = [&](const EntropicSolution& s, Point x, bool u_side) {
    const auto hess = u_side ? hessian_u(s, x) : hessian_v(s, x);
    for (int k = 0; k < static_cast<int>(x.size()); ++k) {
      Point xp = x;
      Point xm = x;
      xp[k] += h;
      xm[k] -= h;
      const Point gp = u_side ? grad_u(s, xp) : grad_v(s, xp);
      const Point gm = u_side ? grad_u(s, xm) : grad_v(s, xm);
      for (int l = 0; l < static_cast<int>(x.size()); ++l) {
        const double fd = (gp[l] - gm[l]) / (2 * h);
        EXPECT_NEAR(hess(l, k), fd, std::max(1e-4, 1e-3 * std::abs(hess(l, k))));
      }
    }
  };
  check(solved("A", 0.05), at(0.5), true);
  check(solved("B", 0.05), at(1.0), false);

  std::mt19937_64 rng(7);
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& s = solved(id, 0.05);
    const int n = s.mu().dimension();
    std::uniform_real_distribution<double> pick(0.05, 0.95);
    for (int t = 0; t < 20; ++t) {
      Point x(n);
      for (double& c : x) c = pick(rng);
      check(s, x, true);
    }
  }
}

TEST(HessianV, ExchangeSymmetry) {
  const auto& s = solved("A", 0.05);
  EXPECT_NEAR(hessian_v(s, at(0.5))(0, 0), hessian_u(s, at(0.5))(0, 0), 1e-8);
  const auto hv = hessian_v(solved("B", 0.05), at(1.3));
  EXPECT_GE(hv(0, 0), 0.0);
}

TEST(SuboptimalityGap, IdentityGapEqualsCost) {
  const auto& s = solved("A", 0.05);
  const auto g = suboptimality_gap(s, reference("A"));
  EXPECT_NEAR(g.gap, entropic_cost(s), 1e-15);
}

TEST(SuboptimalityGap, DetachmentIntegralMatchesTransportGap) {
  const auto& s = solved("B", 0.05);
  const auto g = suboptimality_gap(s, reference("B"));
  // Independent evaluation of the transport gap from the raw plan.
  double tc = 0.0;
  for (std::size_t i = 0; i < s.mu().size(); ++i)
    for (std::size_t j = 0; j < s.nu().size(); ++j) {
      const double d = s.mu().node(i)[0] - s.nu().node(j)[0];
      tc += s.mu().weight(i) * s.nu().weight(j) * plan_density_at(s, i, j) * 0.5 * d * d;
    }
  EXPECT_NEAR(g.transport_gap, tc - reference("B").w2sq, 1e-12);
  EXPECT_NEAR(g.detachment_integral, g.transport_gap, 1e-6);
  EXPECT_GE(g.gap, g.transport_gap);
}

TEST(SuboptimalityGap, NonNegativeEverywhere) {
  for (const char* id : {"A", "B", "C", "D"})
    for (double eps : {0.2, 0.05}) EXPECT_GE(suboptimality_gap(solved(id, eps), reference(id)).gap, -1e-8);
}

TEST(SuboptimalityGap, NormalizedRatioNearHalfInOneDimension) {
  double ratio = 0.0;
  for (double eps : {0.2, 0.1, 0.05, 0.02, 0.01})
    ratio = suboptimality_gap(solved("B", eps), reference("B")).gap / (eps * std::log(1.0 / eps));
  EXPECT_GE(ratio, 0.3);
  EXPECT_LE(ratio, 0.8);
}

TEST(SuboptimalityGap, MismatchedInstanceRejected) {
  try {
    (void)suboptimality_gap(solved("A", 0.05), reference("C"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InstanceMismatch);
  }
}

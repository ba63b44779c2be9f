#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <map>

#include "eotlab/error.hpp"
#include "eotlab/estimates.hpp"
#include "eotlab/instances.hpp"
#include "eotlab/potentials.hpp"

using namespace eotlab;

namespace {

const SweepReport& sweep(const std::string& id) {
  static std::map<std::string, SweepReport> cache;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, run_sweep(builtin_instance(id), SweepOptions{})).first;
  return it->second;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

struct Solved {
  InstanceMarginals inst;
  ReferenceSolution ref;
  EntropicSolution sol;
};

Solved solve(const std::string& id, double eps, int res = 0) {
  Solved s{build_instance(builtin_instance(id, res)), {}, {}};
  s.ref = solve_quantile_1d(s.inst.mu, s.inst.nu);
  s.sol = solve_schrodinger(s.inst.mu, s.inst.nu, eps);
  return s;
}

const ConvexDomain kSubset = ConvexDomain::box({{0.1, 0.9}});

}  // namespace

TEST(BetaFromAlpha, Formula) {
  EXPECT_DOUBLE_EQ(beta_from_alpha(1.0, 1), 0.25);
  EXPECT_DOUBLE_EQ(beta_from_alpha(1.0, 2), 0.25);
  EXPECT_NEAR(beta_from_alpha(0.5, 1), 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(beta_from_alpha(1.0, 3), 1.0 / 9.0);
  EXPECT_EQ(kind_of([] { beta_from_alpha(0.0, 1); }), ErrorKind::Parameter);
  EXPECT_EQ(kind_of([] { beta_from_alpha(1.2, 1); }), ErrorKind::Parameter);
}

TEST(P0FromAlpha, Formula) {
  EXPECT_DOUBLE_EQ(p0_from_alpha(1.0), 2.0);
  EXPECT_DOUBLE_EQ(p0_from_alpha(0.5), 3.0);
  EXPECT_DOUBLE_EQ(p0_from_alpha(0.25), 5.0);
  EXPECT_EQ(kind_of([] { p0_from_alpha(-0.1); }), ErrorKind::Parameter);
}

TEST(FitRate, ExactPowerLaw) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02};
  std::vector<double> v;
  for (double e : eps) v.push_back(3.0 * std::pow(e, 0.7));
  const auto f = fit_rate(eps, v, RateModel::Power);
  EXPECT_NEAR(f.value, 0.7, 1e-12);
  EXPECT_NEAR(f.constant, 3.0, 1e-12);
  EXPECT_NEAR(f.stderr_, 0.0, 1e-10);
  EXPECT_EQ(f.points, 4u);
  EXPECT_DOUBLE_EQ(f.eps_min, 0.02);
  EXPECT_DOUBLE_EQ(f.eps_max, 0.2);
}

TEST(FitRate, ExactEpsLog) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<double> v;
  for (double e : eps) v.push_back(0.5 * e * std::log(1.0 / e));
  const auto f = fit_rate(eps, v, RateModel::EpsLog);
  EXPECT_NEAR(f.value, 0.5, 1e-12);
  EXPECT_NEAR(f.stderr_, 0.0, 1e-10);
}

TEST(FitRate, PerturbedPowerLawWithinNormalEquationBound) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<double> v;
  for (std::size_t k = 0; k < eps.size(); ++k) v.push_back(std::pow(eps[k], 0.7) * (1.0 + (k % 2 ? -0.05 : 0.05)));
  const auto f = fit_rate(eps, v, RateModel::Power);
  // Slope shift = sum (x_k - mean) d_k / sum (x_k - mean)^2 with |d_k| <= log(1.05).
  double mx = 0.0;
  for (double e : eps) mx += std::log(e) / eps.size();
  double sxx = 0.0;
  double sabs = 0.0;
  for (double e : eps) {
    sxx += std::pow(std::log(e) - mx, 2);
    sabs += std::abs(std::log(e) - mx);
  }
  const double bound = std::log(1.05) * sabs / sxx;
  EXPECT_LE(std::abs(f.value - 0.7), bound);
  EXPECT_LE(std::abs(f.value - 0.7), 0.05);
  EXPECT_GT(f.stderr_, 0.0);
}

TEST(FitRate, Errors) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02};
  EXPECT_EQ(kind_of([&] { fit_rate(std::span(eps).first(3), std::vector<double>{1, 1, 1}, RateModel::Power); }),
            ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([&] { fit_rate(eps, std::vector<double>{1, 0, 1, 1}, RateModel::Power); }), ErrorKind::LogDomain);
  EXPECT_EQ(kind_of([&] { fit_rate(eps, std::vector<double>{1, -1, 1, 1}, RateModel::EpsLog); }), ErrorKind::LogDomain);
  EXPECT_EQ(kind_of([&] { fit_rate(std::vector<double>{0.1, 0.2, 0.05, 0.02}, std::vector<double>{1, 1, 1, 1}, RateModel::Power); }),
            ErrorKind::Parameter);
}

TEST(LpGradientError, ProductLimitMatchesDirectEvaluation) {
  const auto s = solve("A", 10.0);
  for (double p : {2.0, 3.0}) {
    double direct = 0.0;
    double product = 0.0;
    for (std::size_t i : s.inst.mu->nodes_in(kSubset)) {
      const double x = s.inst.mu->node(i)[0];
      // Conditional mean from the raw potential vectors.
      double num = 0.0;
      double den = 0.0;
      for (std::size_t j = 0; j < s.inst.nu->size(); ++j) {
        const double y = s.inst.nu->node(j)[0];
        const double w = s.inst.nu->weight(j) * std::exp((x * y - s.sol.v[j]) / 10.0);
        num += w * y;
        den += w;
      }
      direct += s.inst.mu->weight(i) * std::pow(std::abs(num / den - x), p);
      // First-order large-eps expansion: grad u = 1/2 + (x - 1/2) Var(y) / eps.
      product += s.inst.mu->weight(i) * std::pow(std::abs(0.5 - x) * (1.0 - 1.0 / 120.0), p);
    }
    const double value = lp_gradient_error(s.sol, s.ref, kSubset, p);
    EXPECT_NEAR(value, direct, 1e-10);
    EXPECT_NEAR(value, product, 2e-3 * product);
  }
}

TEST(LpGradientError, NonNegativeAndEmptySubsetRejected) {
  const auto s = solve("D", 0.05);
  for (double p : {1.0, 2.0, 3.0}) EXPECT_GT(lp_gradient_error(s.sol, s.ref, kSubset, p), 0.0);
  EXPECT_EQ(kind_of([&] { lp_gradient_error(s.sol, s.ref, ConvexDomain::box({{0.5001, 0.5002}}), 2.0); }),
            ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([&] { lp_gradient_error(s.sol, s.ref, kSubset, 0.5); }), ErrorKind::Parameter);
}

TEST(LpGradientError, DecreasesAlongSchedule) {
  for (const char* id : {"A", "B", "D"}) {
    const auto& r = sweep(id);
    for (std::size_t k = 0; k < 2; ++k) {
      std::vector<double> s;
      for (const auto& row : r.rows) s.push_back(row.lp_errors[k]);
      const auto m = decreasing_violations(s);
      EXPECT_LE(m.violations, 1u) << id;
      EXPECT_LE(m.worst, 1e-8) << id;
    }
  }
}

TEST(SupPotentialError, ZeroAtMinimizerAfterNormalization) {
  const auto s = solve("B", 0.05);
  const auto n = normalize_pair(s.sol, s.ref.u0, kSubset);
  double mn = 1e300;
  for (std::size_t i : s.inst.mu->nodes_in(kSubset)) mn = std::min(mn, std::abs(n.u[i] - s.ref.u0[i]));
  EXPECT_EQ(mn, 0.0);
  EXPECT_GT(sup_potential_error(n, s.ref, kSubset), 0.0);
  EXPECT_EQ(kind_of([&] { sup_potential_error(s.sol, s.ref, kSubset); }), ErrorKind::Normalization);
}

TEST(SupPotentialError, DecreasesOnIdentity) {
  const auto& r = sweep("A");
  // Rows for eps 0.1, 0.05, 0.02.
  EXPECT_GT(r.rows[1].sup_u_err, r.rows[2].sup_u_err);
  EXPECT_GT(r.rows[2].sup_u_err, r.rows[3].sup_u_err);
}

TEST(SupGradientError, SmallAtFineEpsilon) {
  const auto s = solve("A", 0.005, 256);
  EXPECT_LE(sup_gradient_error(s.sol, s.ref, kSubset), 0.05);
}

TEST(SupGradientError, DominatesMean) {
  for (const char* id : {"A", "B", "D"}) {
    const auto& r = sweep(id);
    for (const auto& row : r.rows)
      for (std::size_t k = 0; k < r.ps.size(); ++k)
        EXPECT_GE(std::pow(row.sup_grad_err, r.ps[k]) * r.subset_mass, row.lp_errors[k] * (1 - 1e-12));
  }
}

TEST(HessianSupNorm, EnvelopeAndProductLimit) {
  const auto s = solve("A", 10.0);
  EXPECT_NEAR(hessian_sup_norm(s.sol, kSubset), 1.0 / 120.0, 0.1 / 120.0);
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& r = sweep(id);
    for (const auto& row : r.rows) {
      EXPECT_LE(row.hessian.sup_norm, r.target_diameter * r.target_diameter / (4 * row.epsilon) + 1e-9);
      EXPECT_GE(row.hessian.min_eigenvalue, -1e-10);
      EXPECT_EQ(row.hessian.max_asymmetry, 0.0);
    }
  }
}

TEST(HolderSeminorm, LinearReferenceMapIsLipschitzOne) {
  const auto s = solve("A", 0.05);
  const double h = s.inst.mu->grid_spacing();
  const auto r = holder_seminorm(s.ref, kSubset, 1.0, 2 * h);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(HolderSeminorm, UniformInEpsilonOnIdentity) {
  SweepOptions o;
  o.epsilons = {0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  const auto r = run_sweep(builtin_instance("A"), o);
  EXPECT_DOUBLE_EQ(r.beta_used, 0.25);
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.holder.value);
  EXPECT_LE(worst, 3.0 * r.reference_holder.value);
}

TEST(HolderSeminorm, DoublingSeparationNeverIncreases) {
  const auto s = solve("D", 0.02);
  const double h = s.inst.mu->grid_spacing();
  for (double beta : {0.25, 0.5, 1.0}) {
    const auto a = holder_seminorm(s.sol, kSubset, beta, 2 * h);
    const auto b = holder_seminorm(s.sol, kSubset, beta, 4 * h);
    EXPECT_LE(b.value, a.value);
    EXPECT_EQ(a.value, std::max(a.near, a.far));
    EXPECT_GT(a.near_pairs, 0u);
    EXPECT_GT(a.far_pairs, 0u);
  }
}

TEST(HolderSeminorm, Errors) {
  const auto s = solve("A", 0.05);
  const double h = s.inst.mu->grid_spacing();
  EXPECT_EQ(kind_of([&] { holder_seminorm(s.sol, kSubset, 0.0, 2 * h); }), ErrorKind::Parameter);
  EXPECT_EQ(kind_of([&] { holder_seminorm(s.sol, kSubset, 1.5, 2 * h); }), ErrorKind::Parameter);
  EXPECT_EQ(kind_of([&] { holder_seminorm(s.sol, kSubset, 0.5, h); }), ErrorKind::Parameter);
  EXPECT_EQ(kind_of([&] { holder_seminorm(s.sol, kSubset, 0.5, 2.0); }), ErrorKind::InsufficientData);
}

TEST(RunSweep, IdentityReportComplete) {
  const auto& r = sweep("A");
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.epsilons, (std::vector<double>{0.2, 0.1, 0.05, 0.02, 0.01}));
  EXPECT_EQ(r.ps.size(), 3u);
  for (const char* name : {"cpt_slope", "a_hat", "b_hat", "m_hat", "lp_slope_p2", "lp_slope_p3"}) {
    ASSERT_TRUE(r.fitted.count(name)) << name;
    EXPECT_DOUBLE_EQ(r.fitted.at(name).eps_max, 0.1);
    EXPECT_DOUBLE_EQ(r.fitted.at(name).eps_min, 0.01);
  }
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    EXPECT_GT(row.gap, 0.0);
    if (k > 0) EXPECT_LT(row.gap, r.rows[k - 1].gap);
    EXPECT_EQ(row.lp_errors.size(), r.ps.size());
    EXPECT_LE(row.residual, 1e-9);
  }
  for (const auto& c : evaluate_checks(r)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(RunSweep, DilationGapSlopeNearHalf) {
  const auto& r = sweep("B");
  const double slope = r.fitted.at("cpt_slope").value;
  EXPECT_GE(slope, 0.3);
  EXPECT_LE(slope, 0.8);
}

TEST(RunSweep, RateThresholdsOnOneDimensionalInstances) {
  for (const char* id : {"A", "B", "D"}) {
    const auto& r = sweep(id);
    EXPECT_GT(r.fitted.at("a_hat").value, 0.1) << id;
    EXPECT_GT(r.fitted.at("b_hat").value, 0.1) << id;
    EXPECT_LT(r.fitted.at("m_hat").value, 0.95) << id;
  }
}

TEST(RunSweep, TwoDimensionalInstanceCompletes) {
  SweepOptions o;
  o.epsilons = {0.5, 0.2, 0.1, 0.05};
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_sweep(builtin_instance("C"), o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 300.0);
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.reference_method, "discrete-lp");
  EXPECT_TRUE(r.fitted.count("cpt_slope"));
  // On the default schedule the slope sits in the stated window.
  const double slope = sweep("C").fitted.at("cpt_slope").value;
  EXPECT_GE(slope, 0.5);
  EXPECT_LE(slope, 1.6);
}

TEST(RunSweep, GapPositiveAndMonotoneEverywhere) {
  for (const char* id : {"A", "B", "C", "D"}) {
    const auto& r = sweep(id);
    std::vector<double> gaps;
    for (const auto& row : r.rows) {
      EXPECT_GE(row.gap, -1e-8);
      gaps.push_back(row.gap);
    }
    EXPECT_LE(decreasing_violations(gaps).violations, 1u);
  }
}

TEST(RunSweep, DeterministicBytes) {
  const auto a = run_sweep(builtin_instance("D"), SweepOptions{});
  const auto b = run_sweep(builtin_instance("D"), SweepOptions{});
  EXPECT_EQ(sweep_csv(a), sweep_csv(b));
  EXPECT_EQ(sweep_summary(a, evaluate_checks(a)), sweep_summary(b, evaluate_checks(b)));
}

TEST(RunSweep, ScheduleValidation) {
  SweepOptions o;
  o.epsilons = {0.1, 0.1, 0.05};
  EXPECT_EQ(kind_of([&] { run_sweep(builtin_instance("A", 16), o); }), ErrorKind::Parameter);
  o.epsilons = {0.1, -0.05};
  EXPECT_EQ(kind_of([&] { run_sweep(builtin_instance("A", 16), o); }), ErrorKind::Parameter);
}

TEST(SweepCsv, HeaderSchema) {
  EXPECT_EQ(sweep_csv_header(sweep("A")),
            "epsilon,gap,lp_err_p2,lp_err_p3,lp_err_p0,sup_u_err,sup_grad_err,hess_norm,holder_seminorm,iterations,"
            "residual");
  SweepOptions o;
  o.epsilons = {0.2, 0.1};
  o.ps = {2.0, 3.0, 4.0};
  const auto r = run_sweep(builtin_instance("A", 32), o);
  EXPECT_EQ(sweep_csv_header(r).substr(sweep_csv_header(r).rfind(',') + 1), "lp_err_p4");
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_FALSE(r.fit_failures.empty());
}

TEST(DecreasingViolations, CountsRises) {
  const std::vector<double> s{5, 4, 4.5, 3, 3, 3.2};
  const auto m = decreasing_violations(s);
  EXPECT_EQ(m.violations, 2u);
  EXPECT_NEAR(m.worst, 0.5, 1e-15);
  EXPECT_EQ(decreasing_violations(s, 0.3).violations, 1u);
}

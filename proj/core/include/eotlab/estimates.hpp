#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eotlab/domain.hpp"
#include "eotlab/instances.hpp"
#include "eotlab/reference_ot.hpp"
#include "eotlab/sinkhorn.hpp"

namespace eotlab {

enum class RateModel { Power, EpsLog };

struct RateFit {
  /// Power model: exponent of v ~ c eps^k. Eps-log model: slope of
  /// v ~ k eps log(1/eps) through the origin.
  double value = 0.0;
  double constant = 0.0;
  double stderr_ = 0.0;
  /// Range of eps the fit was computed on.
  double eps_min = 0.0;
  double eps_max = 0.0;
  std::size_t points = 0;
};

/// Least-squares rate fit. Needs at least 4 points, strictly decreasing
/// epsilons and strictly positive values.
RateFit fit_rate(std::span<const double> epsilons, std::span<const double> values, RateModel model);

/// min(1/n^2, alpha^2/(1+alpha)^2).
double beta_from_alpha(double alpha, int n);
/// (1+alpha)/alpha.
double p0_from_alpha(double alpha);

/// sum over subset nodes of w_i |grad u_eps(x_i) - grad u0(x_i)|^p (no root).
double lp_gradient_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset,
                         double p);
/// max over subset nodes of |u_eps - u0|; `sol` must be normalized against
/// u0 on the same subset.
double sup_potential_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset);
double sup_gradient_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset);

struct HessianStats {
  double sup_norm = 0.0;
  double min_eigenvalue = 0.0;
  double max_asymmetry = 0.0;
};

double hessian_sup_norm(const EntropicSolution& sol, const ConvexDomain& subset);
HessianStats hessian_stats(const EntropicSolution& sol, const ConvexDomain& subset);

struct HolderSeminorm {
  double value = 0.0;
  /// Pairs closer than eps, and pairs at least eps apart.
  double near = 0.0;
  double far = 0.0;
  std::size_t near_pairs = 0;
  std::size_t far_pairs = 0;
};

/// max over subset node pairs with |x - y| >= min_sep of
/// |grad(x) - grad(y)| / |x - y|^beta.
HolderSeminorm holder_seminorm(const EntropicSolution& sol, const ConvexDomain& subset, double beta, double min_sep);
/// Same quantity for the reference map (eps = 0, every pair counts as far).
HolderSeminorm holder_seminorm(const ReferenceSolution& ref, const ConvexDomain& subset, double beta, double min_sep);
/// Generic form over explicit node gradients.
HolderSeminorm holder_seminorm(const DiscreteMarginal& mu, std::span<const std::size_t> nodes,
                               const std::vector<Point>& gradients, double beta, double min_sep, double eps);

struct SweepOptions {
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<double> ps{2.0, 3.0};
  std::optional<double> beta;
  double subset_margin = 0.1;
  /// Accepted range for cpt_slope; the slope is only reported when unset.
  std::optional<std::array<double, 2>> cpt_window;
  SinkhornOptions solver;
  /// Progress lines (one per eps) when non-null.
  std::ostream* log = nullptr;
};

struct SweepRow {
  double epsilon = 0.0;
  double gap = 0.0;
  double transport_gap = 0.0;
  double detachment_integral = 0.0;
  /// One entry per SweepReport::ps.
  std::vector<double> lp_errors;
  double sup_u_err = 0.0;
  double sup_grad_err = 0.0;
  HessianStats hessian;
  HolderSeminorm holder;
  long iterations = 0;
  double residual = 0.0;
  double primal = 0.0;
  double dual = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SweepReport {
  std::string instance_id;
  int dimension = 1;
  std::string reference_method;
  double w2sq = 0.0;
  double alpha_hat = 0.0;
  double p0 = 2.0;
  double beta_used = 0.0;
  double subset_margin = 0.0;
  double subset_mass = 0.0;
  double min_sep = 0.0;
  double target_diameter = 0.0;
  HolderSeminorm reference_holder;
  std::optional<std::array<double, 2>> cpt_window;
  /// 2, 3, p0, then any extra requested exponents.
  std::vector<double> ps;
  std::vector<double> epsilons;
  std::vector<SweepRow> rows;
  /// cpt_slope, a_hat, b_hat, m_hat, and lp_slope_p2 / lp_slope_p3.
  std::map<std::string, RateFit> fitted;
  std::vector<std::string> fit_failures;
};

/// Solves the reference once, then each eps in decreasing order (warm
/// started), and fits the rates on the final decade of eps.
SweepReport run_sweep(const InstanceDefinition& instance, const SweepOptions& options);

/// Acceptance checks on a finished report; any failure maps to exit code 2.
std::vector<CheckResult> evaluate_checks(const SweepReport& report);

/// Fixed-schema CSV, one row per eps, 17 significant digits.
std::string sweep_csv(const SweepReport& report);
std::string sweep_csv_header(const SweepReport& report);
/// key = value summary block with the fitted exponents and check outcomes.
std::string sweep_summary(const SweepReport& report, const std::vector<CheckResult>& checks);

/// Number of times the series increases by more than `tol` from one entry to
/// the next, and the largest such increase.
struct MonotoneStats {
  std::size_t violations = 0;
  double worst = 0.0;
};
MonotoneStats decreasing_violations(std::span<const double> series, double tol = 0.0);

}  // namespace eotlab

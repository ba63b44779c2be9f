#include "eotlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eotlab/error.hpp"
#include "eotlab/potentials.hpp"

namespace eotlab {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kMonotoneSlack = 1e-8;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string p_label(double p) {
  if (p == std::floor(p)) return std::to_string(static_cast<long>(p));
  return fmt6(p);
}

std::vector<std::size_t> subset_nodes(const DiscreteMarginal& mu, const ConvexDomain& subset) {
  auto idx = mu.nodes_in(subset);
  if (idx.empty()) throw Error(ErrorKind::InsufficientData, "subset contains no grid nodes");
  return idx;
}

double gradient_gap(const EntropicSolution& sol, const ReferenceSolution& ref, std::size_t i) {
  const auto g = grad_u(sol, sol.mu().node(i));
  return distance(g, ref.map_at(i));
}

void require_same(const EntropicSolution& sol, const ReferenceSolution& ref) {
  if (!ref.mu().same_nodes(sol.mu()) || !ref.nu().same_nodes(sol.nu()))
    throw Error(ErrorKind::InstanceMismatch, "reference and entropic solution live on different nodes");
}

}  // namespace

RateFit fit_rate(std::span<const double> epsilons, std::span<const double> values, RateModel model) {
  if (epsilons.size() != values.size()) throw Error(ErrorKind::Parameter, "epsilons and values differ in length");
  const std::size_t n = epsilons.size();
  if (n < 4) throw Error(ErrorKind::InsufficientData, "rate fit needs at least 4 points");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(epsilons[k] > 0.0)) throw Error(ErrorKind::Parameter, "epsilons must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw Error(ErrorKind::Parameter, "epsilons must be strictly decreasing");
    if (!(values[k] > 0.0)) throw Error(ErrorKind::LogDomain, "rate fit needs strictly positive values, got " + fmt17(values[k]));
  }

  RateFit fit;
  fit.points = n;
  fit.eps_max = epsilons.front();
  fit.eps_min = epsilons.back();
  const double nd = static_cast<double>(n);
  if (model == RateModel::Power) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      mx += std::log(epsilons[k]);
      my += std::log(values[k]);
    }
    mx /= nd;
    my /= nd;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dx = std::log(epsilons[k]) - mx;
      sxx += dx * dx;
      sxy += dx * (std::log(values[k]) - my);
    }
    fit.value = sxy / sxx;
    const double intercept = my - fit.value * mx;
    fit.constant = std::exp(intercept);
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = std::log(values[k]) - intercept - fit.value * std::log(epsilons[k]);
      rss += r * r;
    }
    fit.stderr_ = std::sqrt(rss / (nd - 2.0) / sxx);
  } else {
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = epsilons[k] * std::log(1.0 / epsilons[k]);
      sxx += x * x;
      sxy += x * values[k];
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "eps log(1/eps) vanishes on every point");
    fit.value = sxy / sxx;
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = values[k] - fit.value * epsilons[k] * std::log(1.0 / epsilons[k]);
      rss += r * r;
    }
    fit.stderr_ = std::sqrt(rss / (nd - 1.0) / sxx);
  }
  return fit;
}

double beta_from_alpha(double alpha, int n) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Parameter, "alpha must lie in (0, 1]");
  if (n < 1) throw Error(ErrorKind::Parameter, "dimension must be at least 1");
  const double r = alpha / (1.0 + alpha);
  return std::min(1.0 / (static_cast<double>(n) * n), r * r);
}

double p0_from_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Parameter, "alpha must lie in (0, 1]");
  return (1.0 + alpha) / alpha;
}

double lp_gradient_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset,
                         double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::Parameter, "p must be at least 1");
  require_same(sol, ref);
  double total = 0.0;
  for (std::size_t i : subset_nodes(sol.mu(), subset)) total += sol.mu().weight(i) * std::pow(gradient_gap(sol, ref, i), p);
  return total;
}

double sup_potential_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset) {
  require_same(sol, ref);
  const auto idx = subset_nodes(sol.mu(), subset);
  double lo = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i : idx) {
    const double d = sol.u[i] - ref.u0[i];
    lo = std::min(lo, d);
    worst = std::max(worst, std::abs(d));
  }
  if (std::abs(lo) > kNormalizationTol)
    throw Error(ErrorKind::Normalization, "min of u_eps - u0 on the subset is " + fmt17(lo) + ", expected 0");
  return worst;
}

double sup_gradient_error(const EntropicSolution& sol, const ReferenceSolution& ref, const ConvexDomain& subset) {
  require_same(sol, ref);
  double worst = 0.0;
  for (std::size_t i : subset_nodes(sol.mu(), subset)) worst = std::max(worst, gradient_gap(sol, ref, i));
  return worst;
}

HessianStats hessian_stats(const EntropicSolution& sol, const ConvexDomain& subset) {
  HessianStats out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i : subset_nodes(sol.mu(), subset)) {
    const Eigen::MatrixXd h = hessian_u(sol, sol.mu().node(i));
    out.max_asymmetry = std::max(out.max_asymmetry, (h - h.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    out.min_eigenvalue = std::min(out.min_eigenvalue, ev.minCoeff());
    out.sup_norm = std::max(out.sup_norm, ev.cwiseAbs().maxCoeff());
  }
  return out;
}

double hessian_sup_norm(const EntropicSolution& sol, const ConvexDomain& subset) {
  return hessian_stats(sol, subset).sup_norm;
}

HolderSeminorm holder_seminorm(const DiscreteMarginal& mu, std::span<const std::size_t> nodes,
                               const std::vector<Point>& gradients, double beta, double min_sep, double eps) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorKind::Parameter, "beta must lie in (0, 1]");
  if (min_sep < 2.0 * mu.grid_spacing() * (1.0 - 1e-12))
    throw Error(ErrorKind::Parameter, "min_sep must be at least two grid spacings");
  HolderSeminorm out;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double d = distance(mu.node(nodes[a]), mu.node(nodes[b]));
      if (d < min_sep) continue;
      const double q = distance(gradients[a], gradients[b]) / std::pow(d, beta);
      if (d < eps) {
        out.near = std::max(out.near, q);
        ++out.near_pairs;
      } else {
        out.far = std::max(out.far, q);
        ++out.far_pairs;
      }
    }
  }
  if (out.near_pairs + out.far_pairs == 0) throw Error(ErrorKind::InsufficientData, "no node pairs at least min_sep apart");
  out.value = std::max(out.near, out.far);
  return out;
}

HolderSeminorm holder_seminorm(const EntropicSolution& sol, const ConvexDomain& subset, double beta, double min_sep) {
  const auto idx = subset_nodes(sol.mu(), subset);
  std::vector<Point> grads;
  grads.reserve(idx.size());
  for (std::size_t i : idx) grads.push_back(grad_u(sol, sol.mu().node(i)));
  return holder_seminorm(sol.mu(), idx, grads, beta, min_sep, sol.epsilon);
}

HolderSeminorm holder_seminorm(const ReferenceSolution& ref, const ConvexDomain& subset, double beta, double min_sep) {
  const auto idx = subset_nodes(ref.mu(), subset);
  std::vector<Point> grads;
  grads.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto t = ref.map_at(i);
    grads.emplace_back(t.begin(), t.end());
  }
  return holder_seminorm(ref.mu(), idx, grads, beta, min_sep, 0.0);
}

MonotoneStats decreasing_violations(std::span<const double> series, double tol) {
  MonotoneStats out;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double rise = series[k] - series[k - 1];
    if (rise > tol) {
      ++out.violations;
      out.worst = std::max(out.worst, rise);
    }
  }
  return out;
}

SweepReport run_sweep(const InstanceDefinition& instance, const SweepOptions& options) {
  if (options.epsilons.empty()) throw Error(ErrorKind::Parameter, "empty eps schedule");
  std::vector<double> eps = options.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0)) throw Error(ErrorKind::Parameter, "eps values must be positive");
    if (k > 0 && eps[k] == eps[k - 1]) throw Error(ErrorKind::Parameter, "duplicate eps value " + fmt17(eps[k]));
  }

  const auto [mu, nu] = build_instance(instance);
  const int n = mu->dimension();
  const ReferenceSolution ref = n == 1 ? solve_quantile_1d(mu, nu) : solve_discrete_lp(mu, nu);
  const ConvexDomain subset = shrink(instance.source_domain, options.subset_margin);

  SweepReport report;
  report.instance_id = instance.id;
  report.dimension = n;
  report.reference_method = std::string(to_string(ref.method));
  report.w2sq = ref.w2sq;
  report.subset_margin = options.subset_margin;
  report.target_diameter = nu->domain().diameter();
  report.min_sep = 2.0 * mu->grid_spacing();
  report.epsilons = eps;
  report.cpt_window = options.cpt_window;
  for (std::size_t i : subset_nodes(*mu, subset)) report.subset_mass += mu->weight(i);

  report.alpha_hat = holder_exponent_u0(ref, subset).alpha;
  report.p0 = p0_from_alpha(report.alpha_hat);
  report.beta_used = options.beta ? *options.beta : beta_from_alpha(report.alpha_hat, n);
  report.reference_holder = holder_seminorm(ref, subset, report.beta_used, report.min_sep);
  report.ps = {2.0, 3.0, report.p0};
  for (double p : options.ps) {
    if (!(p >= 1.0)) throw Error(ErrorKind::Parameter, "p values must be at least 1");
    if (p != 2.0 && p != 3.0) report.ps.push_back(p);
  }

  std::optional<EntropicSolution> previous;
  for (double e : eps) {
    EntropicSolution sol = solve_schrodinger(mu, nu, e, options.solver, previous ? &*previous : nullptr);
    const EntropicSolution normalized = normalize_pair(sol, ref.u0, subset);
    SweepRow row;
    row.epsilon = e;
    const auto gaps = suboptimality_gap(sol, ref);
    row.gap = gaps.gap;
    row.transport_gap = gaps.transport_gap;
    row.detachment_integral = gaps.detachment_integral;
    for (double p : report.ps) row.lp_errors.push_back(lp_gradient_error(sol, ref, subset, p));
    row.sup_u_err = sup_potential_error(normalized, ref, subset);
    row.sup_grad_err = sup_gradient_error(sol, ref, subset);
    row.hessian = hessian_stats(sol, subset);
    row.holder = holder_seminorm(sol, subset, report.beta_used, report.min_sep);
    row.iterations = sol.iterations;
    row.residual = sol.marginal_residual;
    row.primal = sol.primal_value;
    row.dual = sol.dual_value;
    if (options.log) {
      *options.log << "eps " << fmt6(e) << ": " << sol.iterations << " iterations, residual " << fmt6(sol.marginal_residual)
                   << ", gap " << fmt6(row.gap) << '\n';
    }
    report.rows.push_back(std::move(row));
    previous = std::move(sol);
  }

  // Rates are asymptotic: fit on the final decade only.
  const double eps_floor = eps.back();
  std::vector<std::size_t> tail;
  for (std::size_t k = 0; k < eps.size(); ++k)
    if (eps[k] <= 10.0 * eps_floor * (1.0 + 1e-12)) tail.push_back(k);
  auto series = [&](auto get) {
    std::vector<double> out;
    for (std::size_t k : tail) out.push_back(get(report.rows[k]));
    return out;
  };
  std::vector<double> tail_eps;
  for (std::size_t k : tail) tail_eps.push_back(eps[k]);

  auto try_fit = [&](const std::string& name, const std::vector<double>& values, RateModel model, double sign) {
    try {
      RateFit fit = fit_rate(tail_eps, values, model);
      fit.value *= sign;
      report.fitted[name] = fit;
    } catch (const Error& err) {
      report.fit_failures.push_back(name + ": " + err.what());
    }
  };
  try_fit("cpt_slope", series([](const SweepRow& r) { return r.gap; }), RateModel::EpsLog, 1.0);
  try_fit("a_hat", series([](const SweepRow& r) { return r.sup_u_err; }), RateModel::Power, 1.0);
  try_fit("b_hat", series([](const SweepRow& r) { return r.sup_grad_err; }), RateModel::Power, 1.0);
  try_fit("m_hat", series([](const SweepRow& r) { return r.hessian.sup_norm; }), RateModel::Power, -1.0);
  try_fit("lp_slope_p2", series([](const SweepRow& r) { return r.lp_errors[0]; }), RateModel::EpsLog, 1.0);
  try_fit("lp_slope_p3", series([](const SweepRow& r) { return r.lp_errors[1]; }), RateModel::EpsLog, 1.0);
  return report;
}

std::vector<CheckResult> evaluate_checks(const SweepReport& report) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : report.rows) v.push_back(get(r));
    return v;
  };

  {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : report.rows) worst = std::min(worst, r.gap);
    add("gap_positive", worst >= -1e-8, "min gap " + fmt6(worst));
  }
  auto monotone = [&](const std::string& name, const std::vector<double>& v) {
    const auto m = decreasing_violations(v);
    add(name, m.violations <= 1 && m.worst <= kMonotoneSlack,
        std::to_string(m.violations) + " increases, largest " + fmt6(m.worst));
  };
  monotone("gap_monotone", column([](const SweepRow& r) { return r.gap; }));
  monotone("lp_monotone_p2", column([](const SweepRow& r) { return r.lp_errors[0]; }));
  monotone("lp_monotone_p3", column([](const SweepRow& r) { return r.lp_errors[1]; }));

  {
    bool ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    double min_eig = std::numeric_limits<double>::infinity();
    double asym = 0.0;
    const double d2 = report.target_diameter * report.target_diameter;
    for (const auto& r : report.rows) {
      const double excess = r.hessian.sup_norm - d2 / (4.0 * r.epsilon);
      worst_excess = std::max(worst_excess, excess);
      min_eig = std::min(min_eig, r.hessian.min_eigenvalue);
      asym = std::max(asym, r.hessian.max_asymmetry);
      ok = ok && excess <= 1e-9;
    }
    add("hessian_envelope", ok, "max(norm - diam^2/(4 eps)) = " + fmt6(worst_excess));
    add("hessian_psd", min_eig >= -1e-10 && asym == 0.0,
        "min eigenvalue " + fmt6(min_eig) + ", asymmetry " + fmt6(asym));
  }

  {
    double worst = 0.0;
    for (const auto& r : report.rows) worst = std::max(worst, r.holder.value);
    const double bound = 3.0 * report.reference_holder.value;
    add("holder_uniform", worst <= bound, "max seminorm " + fmt6(worst) + " vs 3 x reference " + fmt6(bound));
  }

  {
    bool ok = true;
    for (const auto& r : report.rows)
      for (std::size_t k = 0; k < report.ps.size(); ++k)
        ok = ok && std::pow(r.sup_grad_err, report.ps[k]) * report.subset_mass >= r.lp_errors[k] * (1.0 - 1e-12);
    add("sup_dominates_lp", ok, "sup^p x subset mass >= lp error");
  }

  auto fitted = [&](const std::string& name) -> const RateFit* {
    auto it = report.fitted.find(name);
    return it == report.fitted.end() ? nullptr : &it->second;
  };
  auto threshold = [&](const std::string& name, auto pred, const std::string& rule) {
    const RateFit* f = fitted(name);
    if (!f) {
      add(name, false, "fit unavailable");
      return;
    }
    add(name, pred(*f), fmt6(f->value) + " (stderr " + fmt6(f->stderr_) + "), required " + rule);
  };
  threshold("a_hat", [](const RateFit& f) { return f.value > 0.1; }, "> 0.1");
  threshold("b_hat", [](const RateFit& f) { return f.value > 0.1; }, "> 0.1");
  threshold("m_hat", [](const RateFit& f) { return f.value < 0.95; }, "< 0.95");
  for (const char* name : {"lp_slope_p2", "lp_slope_p3"}) {
    threshold(name, [](const RateFit& f) { return f.value > 0.0 && f.stderr_ < 0.5 * f.value; },
              "> 0 with stderr < 50%");
  }
  if (report.cpt_window) {
    const auto [lo, hi] = *report.cpt_window;
    threshold("cpt_slope", [&](const RateFit& f) { return f.value >= lo && f.value <= hi; },
              "in [" + fmt6(lo) + ", " + fmt6(hi) + "]");
  }
  return out;
}

std::string sweep_csv_header(const SweepReport& report) {
  std::string h = "epsilon,gap,lp_err_p2,lp_err_p3,lp_err_p0,sup_u_err,sup_grad_err,hess_norm,holder_seminorm,iterations,residual";
  for (std::size_t k = 3; k < report.ps.size(); ++k) h += ",lp_err_p" + p_label(report.ps[k]);
  return h;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = sweep_csv_header(report) + "\n";
  for (const auto& r : report.rows) {
    out += fmt17(r.epsilon) + "," + fmt17(r.gap);
    for (std::size_t k = 0; k < 3; ++k) out += "," + fmt17(r.lp_errors[k]);
    out += "," + fmt17(r.sup_u_err) + "," + fmt17(r.sup_grad_err) + "," + fmt17(r.hessian.sup_norm) + "," +
           fmt17(r.holder.value) + "," + std::to_string(r.iterations) + "," + fmt17(r.residual);
    for (std::size_t k = 3; k < r.lp_errors.size(); ++k) out += "," + fmt17(r.lp_errors[k]);
    out += "\n";
  }
  return out;
}

std::string sweep_summary(const SweepReport& report, const std::vector<CheckResult>& checks) {
  std::ostringstream os;
  os << "instance = " << report.instance_id << '\n'
     << "dimension = " << report.dimension << '\n'
     << "reference = " << report.reference_method << '\n'
     << "w2sq = " << fmt17(report.w2sq) << '\n'
     << "alpha_hat = " << fmt17(report.alpha_hat) << " (Holder exponent of grad u0)\n"
     << "p0 = " << fmt17(report.p0) << '\n'
     << "beta = " << fmt17(report.beta_used) << '\n'
     << "subset_margin = " << fmt17(report.subset_margin) << '\n'
     << "min_sep = " << fmt17(report.min_sep) << '\n'
     << "reference_holder = " << fmt17(report.reference_holder.value) << '\n';
  os << "epsilons =";
  for (double e : report.epsilons) os << ' ' << fmt17(e);
  os << '\n';
  for (const auto& [name, f] : report.fitted) {
    os << "fit." << name << " = " << fmt17(f.value) << " stderr " << fmt17(f.stderr_) << " eps [" << fmt17(f.eps_min)
       << ", " << fmt17(f.eps_max) << "] points " << f.points << '\n';
  }
  for (const auto& msg : report.fit_failures) os << "fit_failure = " << msg << '\n';
  bool all = true;
  for (const auto& c : checks) {
    os << "check." << c.name << " = " << (c.passed ? "pass" : "FAIL") << " (" << c.detail << ")\n";
    all = all && c.passed;
  }
  os << "status = " << (all ? "pass" : "FAIL") << '\n';
  return os.str();
}

}  // namespace eotlab

#include "eotlab/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "eotlab/error.hpp"
#include "eotlab/parallel.hpp"
#include "eotlab/potentials.hpp"

namespace eotlab {

namespace {

// Inner products <x_i, y_j>, row-major n x m.
std::vector<double> inner_products(const DiscreteMarginal& mu, const DiscreteMarginal& nu) {
  std::vector<double> k(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) k[i * nu.size() + j] = dot(mu.node(i), nu.node(j));
  return k;
}

// out_i = eps * log sum_j exp(logw_j + (K_ij - other_j)/eps), one side of the
// Schrodinger system; `transpose` selects the column-wise (v) update.
void half_update(std::span<const double> kernel, std::size_t rows, std::size_t cols, bool transpose,
                 std::span<const double> other, std::span<const double> log_w, double eps, int threads,
                 std::vector<double>& out) {
  const std::size_t n_out = transpose ? cols : rows;
  const std::size_t n_sum = transpose ? rows : cols;
  out.resize(n_out);
  const double inv = 1.0 / eps;
  parallel_for(n_out, threads, [&](std::size_t a) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n_sum; ++b) {
      const double kab = transpose ? kernel[b * cols + a] : kernel[a * cols + b];
      mx = std::max(mx, log_w[b] + (kab - other[b]) * inv);
    }
    double s = 0.0;
    for (std::size_t b = 0; b < n_sum; ++b) {
      const double kab = transpose ? kernel[b * cols + a] : kernel[a * cols + b];
      s += std::exp(log_w[b] + (kab - other[b]) * inv - mx);
    }
    out[a] = eps * (mx + std::log(s));
  });
}

double plan_residual(std::span<const double> kernel, const DiscreteMarginal& mu, const DiscreteMarginal& nu,
                     std::span<const double> u, std::span<const double> v, double eps) {
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  std::vector<double> col(m, 0.0);
  double res = 0.0;
  const auto lw_mu = mu.log_weights();
  const auto lw_nu = nu.log_weights();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = std::exp(lw_mu[i] + lw_nu[j] + (kernel[i * m + j] - u[i] - v[j]) / eps);
      row += p;
      col[j] += p;
    }
    res += std::abs(row - mu.weight(i));
  }
  for (std::size_t j = 0; j < m; ++j) res += std::abs(col[j] - nu.weight(j));
  return res;
}

}  // namespace

EntropicSolution solve_schrodinger(const MarginalPtr& mu, const MarginalPtr& nu, double epsilon,
                                   const SinkhornOptions& options, const EntropicSolution* warm_start) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorKind::Parameter, "epsilon must be positive");
  if (!(options.tol > 0.0)) throw Error(ErrorKind::Parameter, "tol must be positive");
  if (options.max_iter < 1) throw Error(ErrorKind::Parameter, "max_iter must be at least 1");
  if (!mu || !nu) throw Error(ErrorKind::Parameter, "missing marginal");
  if (mu->dimension() != nu->dimension()) throw Error(ErrorKind::Parameter, "marginals differ in dimension");

  const std::size_t n = mu->size();
  const std::size_t m = nu->size();
  const auto kernel = inner_products(*mu, *nu);

  std::vector<double> u(n);
  if (warm_start != nullptr) {
    if (!warm_start->mu().same_nodes(*mu))
      throw Error(ErrorKind::Parameter, "warm start lives on different mu nodes");
    std::copy(warm_start->u.values().begin(), warm_start->u.values().end(), u.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) u[i] = 0.5 * dot(mu->node(i), mu->node(i));
  }

  std::vector<double> v;
  std::vector<double> u_next;
  half_update(kernel, n, m, true, u, mu->log_weights(), epsilon, options.threads, v);

  std::vector<double> trace;
  bool warned = false;
  long it = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (true) {
    if (it >= options.max_iter) {
      std::ostringstream os;
      os.precision(6);
      os << "Sinkhorn did not converge at epsilon = " << epsilon << " after " << it
         << " iterations (residual " << residual << " > tol " << options.tol << ")";
      throw NonConvergenceError(epsilon, std::move(trace), os.str());
    }
    ++it;
    half_update(kernel, n, m, false, v, nu->log_weights(), epsilon, options.threads, u_next);
    // Row marginal of the current plan is w_i exp((u_next_i - u_i)/eps).
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += mu->weight(i) * std::abs(std::expm1((u_next[i] - u[i]) / epsilon));
    residual = r;
    trace.push_back(r);

    if (options.trace_csv != nullptr) {
      std::vector<double> phi(n), psi(m);
      for (std::size_t i = 0; i < n; ++i) phi[i] = 0.5 * dot(mu->node(i), mu->node(i)) - u[i];
      for (std::size_t j = 0; j < m; ++j) psi[j] = 0.5 * dot(nu->node(j), nu->node(j)) - v[j];
      char line[96];
      std::snprintf(line, sizeof line, "%ld,%.17g,%.17g\n", it, r, dual_value(*mu, *nu, phi, psi, epsilon));
      *options.trace_csv << line;
    }
    if (!warned && it >= options.warn_iter) {
      std::clog << "warning: Sinkhorn at epsilon = " << epsilon << " still running after " << it
                << " iterations (residual " << r << ")\n";
      warned = true;
    }

    if (r <= options.tol && plan_residual(kernel, *mu, *nu, u, v, epsilon) <= options.tol) break;
    u.swap(u_next);
    half_update(kernel, n, m, true, u, mu->log_weights(), epsilon, options.threads, v);
  }

  EntropicSolution sol;
  sol.u = PotentialField(mu, std::move(u), epsilon, PotentialKind::SchrodingerU);
  sol.v = PotentialField(nu, std::move(v), epsilon, PotentialKind::SchrodingerV);
  sol.epsilon = epsilon;
  sol.iterations = it;
  sol.residual_trace = std::move(trace);
  sol.marginal_residual = marginal_residual(sol);
  sol.primal_value = entropic_cost(sol);
  sol.dual_value = dual_value(sol);
  return sol;
}

double marginal_residual(const EntropicSolution& sol) {
  const auto kernel = inner_products(sol.mu(), sol.nu());
  return plan_residual(kernel, sol.mu(), sol.nu(), sol.u.values(), sol.v.values(), sol.epsilon);
}

EntropicSolution normalize_pair(const EntropicSolution& sol, const PotentialField& u0, const ConvexDomain& subset) {
  if (!u0.marginal().same_nodes(sol.mu()))
    throw Error(ErrorKind::Parameter, "u0 must live on the same grid as u_eps");
  const auto idx = sol.mu().nodes_in(subset);
  if (idx.empty()) throw Error(ErrorKind::EmptySubset, "normalization subset contains no nodes");
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) d = std::min(d, sol.u[i] - u0[i]);
  EntropicSolution out = sol;
  out.u = sol.u.shifted(-d);
  out.v = sol.v.shifted(d);
  return out;
}

}  // namespace eotlab

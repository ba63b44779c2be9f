#include "eotlab/reference_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "eotlab/error.hpp"

namespace eotlab {

std::string_view to_string(ReferenceMethod method) noexcept {
  return method == ReferenceMethod::Quantile1D ? "quantile-1d" : "discrete-lp";
}

namespace {

double half_sq(std::span<const double> x, std::span<const double> y) { return 0.5 * squared_distance(x, y); }

std::vector<double> row_barycenters(const DiscreteMarginal& mu, const DiscreteMarginal& nu,
                                    const std::vector<TransportEntry>& plan) {
  const auto dim = static_cast<std::size_t>(mu.dimension());
  std::vector<double> out(mu.size() * dim, 0.0);
  std::vector<double> mass(mu.size(), 0.0);
  for (const auto& e : plan) {
    const auto y = nu.node(e.j);
    for (std::size_t k = 0; k < dim; ++k) out[e.i * dim + k] += e.mass * y[k];
    mass[e.i] += e.mass;
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mass[i] > 0.0)) throw Error(ErrorKind::Internal, "optimal plan has an empty row");
    for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] /= mass[i];
  }
  return out;
}

ReferenceSolution assemble(const MarginalPtr& mu, const MarginalPtr& nu, std::vector<double> phi,
                           std::vector<double> psi, std::vector<TransportEntry> plan, ReferenceMethod method) {
  ReferenceSolution ref;
  ref.method = method;
  for (const auto& e : plan) ref.w2sq += e.mass * half_sq(mu->node(e.i), nu->node(e.j));
  double dual = 0.0;
  for (std::size_t i = 0; i < mu->size(); ++i) dual += mu->weight(i) * phi[i];
  for (std::size_t j = 0; j < nu->size(); ++j) dual += nu->weight(j) * psi[j];
  ref.duality_gap = ref.w2sq - dual;

  std::vector<double> u0(mu->size());
  std::vector<double> v0(nu->size());
  for (std::size_t i = 0; i < mu->size(); ++i) u0[i] = 0.5 * dot(mu->node(i), mu->node(i)) - phi[i];
  for (std::size_t j = 0; j < nu->size(); ++j) v0[j] = 0.5 * dot(nu->node(j), nu->node(j)) - psi[j];
  ref.map_values = row_barycenters(*mu, *nu, plan);
  ref.u0 = PotentialField(mu, std::move(u0), 0.0, PotentialKind::KantorovichU0);
  ref.v0 = PotentialField(nu, std::move(v0), 0.0, PotentialKind::KantorovichV0);
  ref.plan = std::move(plan);
  return ref;
}

}  // namespace

ReferenceSolution solve_quantile_1d(const MarginalPtr& mu, const MarginalPtr& nu) {
  if (mu->dimension() != 1 || nu->dimension() != 1)
    throw Error(ErrorKind::Method, "quantile coupling requires dimension 1");
  const std::size_t n = mu->size();
  const std::size_t m = nu->size();

  std::vector<double> a(n + 1, 0.0);
  std::vector<double> b(m + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i + 1] = a[i] + mu->weight(i);
  for (std::size_t j = 0; j < m; ++j) b[j + 1] = b[j] + nu->weight(j);
  a[n] = 1.0;
  b[m] = 1.0;

  auto cost = [&](std::size_t i, std::size_t j) { return half_sq(mu->node(i), nu->node(j)); };

  // Staircase (north-west corner) basis: a spanning path through the n+m-1
  // cells of the monotone coupling. Ties advance the column first, which
  // adds a zero-mass basic cell and keeps the path connected.
  std::vector<double> phi(n, 0.0);
  std::vector<double> psi(m, 0.0);
  std::vector<TransportEntry> plan;
  std::size_t i = 0;
  std::size_t j = 0;
  psi[0] = cost(0, 0);
  while (true) {
    const double mass = std::min(a[i + 1], b[j + 1]) - std::max(a[i], b[j]);
    if (mass > 0.0) plan.push_back({i, j, mass});
    if (i == n - 1 && j == m - 1) break;
    if (j == m - 1 || (i < n - 1 && a[i + 1] < b[j + 1])) {
      ++i;
      phi[i] = cost(i, j) - psi[j];
    } else {
      ++j;
      psi[j] = cost(i, j) - phi[i];
    }
  }

  ReferenceSolution ref = assemble(mu, nu, phi, psi, std::move(plan), ReferenceMethod::Quantile1D);

  // v0 as the discrete Legendre transform of u0 over the nu nodes.
  std::vector<double> v0(m);
  for (std::size_t jj = 0; jj < m; ++jj) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ii = 0; ii < n; ++ii)
      best = std::max(best, mu->node(ii)[0] * nu->node(jj)[0] - ref.u0[ii]);
    v0[jj] = best;
  }
  ref.v0 = PotentialField(nu, std::move(v0), 0.0, PotentialKind::KantorovichV0);
  double dual = 0.0;
  for (std::size_t ii = 0; ii < n; ++ii) dual += mu->weight(ii) * (0.5 * mu->node(ii)[0] * mu->node(ii)[0] - ref.u0[ii]);
  for (std::size_t jj = 0; jj < m; ++jj) dual += nu->weight(jj) * (0.5 * nu->node(jj)[0] * nu->node(jj)[0] - ref.v0[jj]);
  ref.duality_gap = ref.w2sq - dual;
  return ref;
}

ReferenceSolution solve_discrete_lp(const MarginalPtr& mu, const MarginalPtr& nu, const LpOptions& options) {
  if (mu->dimension() != nu->dimension()) throw Error(ErrorKind::Parameter, "marginals differ in dimension");
  if (mu->size() > options.max_nodes_per_side || nu->size() > options.max_nodes_per_side) {
    std::ostringstream os;
    os << "LP size " << mu->size() << " x " << nu->size() << " exceeds the cap of " << options.max_nodes_per_side
       << " nodes per side";
    throw Error(ErrorKind::Capacity, os.str());
  }
  const std::size_t n = mu->size();
  const std::size_t m = nu->size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = half_sq(mu->node(i), nu->node(j));

  TransportResult lp = solve_transport(mu->weights(), nu->weights(), cost, options.pivot_tol);
  ReferenceSolution ref = assemble(mu, nu, std::move(lp.phi), std::move(lp.psi), std::move(lp.flows),
                                   ReferenceMethod::DiscreteLP);

  // Rows whose support is spread out indicate a plan that is not a map.
  const double h = nu->grid_spacing();
  std::vector<std::vector<std::size_t>> rows(n);
  for (const auto& e : ref.plan) rows[e.i].push_back(e.j);
  std::size_t spread = 0;
  for (const auto& row : rows) {
    double diam = 0.0;
    for (std::size_t p = 0; p < row.size(); ++p)
      for (std::size_t q = p + 1; q < row.size(); ++q) diam = std::max(diam, distance(nu->node(row[p]), nu->node(row[q])));
    if (diam > 2.0 * h) ++spread;
  }
  if (spread > 0) {
    ref.warnings.push_back(std::to_string(spread) +
                           " plan rows have support wider than two grid spacings (not a map at this resolution)");
  }
  return ref;
}

double ma_residual(const ReferenceSolution& ref, const DensitySpec& f, const DensitySpec& g) {
  const auto& mu = ref.mu();
  const int dim = mu.dimension();
  if (mu.resolution() < 3) throw Error(ErrorKind::Resolution, "need at least 3 nodes per axis");

  double worst = 0.0;
  std::size_t interior = 0;
  Eigen::MatrixXd hess(dim, dim);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto idx = mu.multi_index(i);
    bool ok = true;
    auto at = [&](int k, int dk, int l, int dl) -> double {
      std::vector<int> q = idx;
      q[static_cast<std::size_t>(k)] += dk;
      q[static_cast<std::size_t>(l)] += dl;
      const long node = mu.node_at(q);
      if (node < 0) {
        ok = false;
        return 0.0;
      }
      return ref.u0[static_cast<std::size_t>(node)];
    };
    const double center = ref.u0[i];
    for (int k = 0; k < dim && ok; ++k) {
      const double hk = mu.spacing(k);
      hess(k, k) = (at(k, 1, k, 0) - 2.0 * center + at(k, -1, k, 0)) / (hk * hk);
      for (int l = 0; l < k && ok; ++l) {
        const double hl = mu.spacing(l);
        hess(k, l) = hess(l, k) =
            (at(k, 1, l, 1) - at(k, 1, l, -1) - at(k, -1, l, 1) + at(k, -1, l, -1)) / (4.0 * hk * hl);
      }
    }
    if (!ok) continue;
    ++interior;
    const double value = g(ref.map_at(i)) * hess.determinant() - f(mu.node(i));
    worst = std::max(worst, std::abs(value));
  }
  if (interior == 0) throw Error(ErrorKind::Resolution, "no interior nodes with full stencils");
  return worst;
}

HolderFit holder_exponent_u0(const ReferenceSolution& ref, const ConvexDomain& subset) {
  const auto& mu = ref.mu();
  const auto& nu = ref.nu();
  const auto idx = mu.nodes_in(subset);
  const double min_sep = 2.0 * mu.grid_spacing();

  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    for (std::size_t q = p + 1; q < idx.size(); ++q) {
      const double dx = distance(mu.node(idx[p]), mu.node(idx[q]));
      if (dx < min_sep) continue;
      const double dt = distance(ref.map_at(idx[p]), ref.map_at(idx[q]));
      if (!(dt > 0.0)) continue;
      lx.push_back(std::log(dx));
      ly.push_back(std::log(dt));
    }
  }
  if (lx.size() < 10) throw Error(ErrorKind::InsufficientData, "fewer than 10 admissible node pairs");

  const double nx = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= nx;
  my /= nx;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  HolderFit fit;
  fit.pairs = lx.size();
  const double slope = sxx > 0.0 ? sxy / sxx : 1.0;
  fit.alpha = std::clamp(slope, 1e-6, 1.0);
  for (std::size_t k = 0; k < lx.size(); ++k)
    fit.constant = std::max(fit.constant, std::exp(ly[k] - fit.alpha * lx[k]));

  const double p = (1.0 + fit.alpha) / fit.alpha;
  const double cutoff = 2.0 * std::max(mu.grid_spacing(), nu.grid_spacing());
  fit.implied_detachment = std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double d = distance(nu.node(j), ref.map_at(i));
      if (d < cutoff) continue;
      const double slack = ref.u0[i] + ref.v0[j] - dot(mu.node(i), nu.node(j));
      fit.implied_detachment = std::min(fit.implied_detachment, slack / std::pow(d, p));
    }
  }
  return fit;
}

}  // namespace eotlab

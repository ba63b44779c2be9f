#include "eotlab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eotlab/error.hpp"

namespace eotlab {

namespace {

enum : signed char { kTree = 0, kLower = 1 };
enum : signed char { kUp = 1, kDown = -1 };

class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost,
                 double tol)
      : n_(supply.size()), m_(demand.size()), tol_(tol) {
    nodes_ = n_ + m_;
    root_ = nodes_;
    real_arcs_ = n_ * m_;
    const std::size_t all_arcs = real_arcs_ + nodes_;
    source_.resize(all_arcs);
    target_.resize(all_arcs);
    cost_.resize(all_arcs);
    flow_.assign(all_arcs, 0.0);
    state_.assign(all_arcs, kLower);

    double max_cost = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const std::size_t e = i * m_ + j;
        source_[e] = i;
        target_[e] = n_ + j;
        cost_[e] = cost[e];
        max_cost = std::max(max_cost, std::abs(cost[e]));
      }
    }
    const double art_cost = (max_cost + 1.0) * static_cast<double>(nodes_);
    for (std::size_t u = 0; u < nodes_; ++u) {
      const std::size_t e = real_arcs_ + u;
      const double s = u < n_ ? supply[u] : -demand[u - n_];
      state_[e] = kTree;
      if (s >= 0.0) {
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = s;
        cost_[e] = 0.0;
      } else {
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -s;
        cost_[e] = art_cost;
      }
    }
    scale_tol_ = tol_ * (1.0 + max_cost);

    parent_.assign(nodes_ + 1, 0);
    pred_.assign(nodes_ + 1, 0);
    dir_.assign(nodes_ + 1, kUp);
    depth_.assign(nodes_ + 1, 0);
    pi_.assign(nodes_ + 1, 0.0);
    adj_start_.assign(nodes_ + 2, 0);
    adj_.resize(2 * nodes_);
    tree_arcs_.reserve(nodes_);
    queue_.resize(nodes_ + 1);
    seen_.assign(nodes_ + 1, 0);
    block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))));
    rebuild_tree();
  }

  TransportResult run() {
    const long max_pivots = 200L * static_cast<long>(real_arcs_ + nodes_) + 100000L;
    long pivots = 0;
    std::size_t in_arc = 0;
    while (find_entering(in_arc)) {
      pivot(in_arc);
      if (++pivots > max_pivots) throw Error(ErrorKind::Internal, "network simplex exceeded its pivot budget");
    }

    double infeasible = 0.0;
    for (std::size_t u = 0; u < nodes_; ++u) infeasible = std::max(infeasible, flow_[real_arcs_ + u]);
    if (infeasible > 1e-9) throw Error(ErrorKind::Internal, "transport LP infeasible (artificial flow remains)");

    TransportResult out;
    out.pivots = pivots;
    out.phi.resize(n_);
    out.psi.resize(m_);
    const double gauge = -pi_[0];
    for (std::size_t i = 0; i < n_; ++i) out.phi[i] = -pi_[i] - gauge;
    for (std::size_t j = 0; j < m_; ++j) out.psi[j] = pi_[n_ + j] + gauge;
    for (std::size_t e = 0; e < real_arcs_; ++e) {
      if (flow_[e] > 0.0) {
        out.flows.push_back({source_[e], target_[e] - n_, flow_[e]});
        out.primal += flow_[e] * cost_[e];
      }
    }
    return out;
  }

 private:
  bool find_entering(std::size_t& in_arc) {
    double best = -scale_tol_;
    bool found = false;
    std::size_t cnt = block_size_;
    std::size_t e = next_arc_;
    for (std::size_t visited = 0; visited < real_arcs_; ++visited) {
      if (state_[e] == kLower) {
        const double c = cost_[e] + pi_[source_[e]] - pi_[target_[e]];
        if (c < best) {
          best = c;
          in_arc = e;
          found = true;
        }
      }
      if (++e == real_arcs_) e = 0;
      if (--cnt == 0) {
        if (found) break;
        cnt = block_size_;
      }
    }
    next_arc_ = e;
    return found;
  }

  void pivot(std::size_t in_arc) {
    const std::size_t first = source_[in_arc];
    const std::size_t second = target_[in_arc];

    std::size_t a = first;
    std::size_t b = second;
    while (depth_[a] > depth_[b]) a = parent_[a];
    while (depth_[b] > depth_[a]) b = parent_[b];
    while (a != b) {
      a = parent_[a];
      b = parent_[b];
    }
    const std::size_t join = a;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double delta = kInf;
    std::size_t u_out = root_;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      const double d = dir_[u] == kUp ? flow_[pred_[u]] : kInf;
      if (d < delta) {
        delta = d;
        u_out = u;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      const double d = dir_[u] == kDown ? flow_[pred_[u]] : kInf;
      if (d <= delta) {
        delta = d;
        u_out = u;
      }
    }
    if (u_out == root_ || !std::isfinite(delta)) throw Error(ErrorKind::Internal, "transport LP is unbounded");

    if (delta > 0.0) {
      flow_[in_arc] += delta;
      for (std::size_t u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= dir_[u] * delta;
      for (std::size_t u = second; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] * delta;
    }
    const std::size_t out_arc = pred_[u_out];
    flow_[out_arc] = 0.0;
    state_[out_arc] = kLower;
    state_[in_arc] = kTree;
    tree_arcs_.erase(std::find(tree_arcs_.begin(), tree_arcs_.end(), out_arc));
    tree_arcs_.push_back(in_arc);
    rebuild_tree(false);
  }

  // Recomputes parent/pred/dir/depth and potentials by BFS from the root.
  void rebuild_tree(bool collect = true) {
    if (collect) {
      tree_arcs_.clear();
      for (std::size_t e = 0; e < state_.size(); ++e)
        if (state_[e] == kTree) tree_arcs_.push_back(e);
    }
    std::fill(adj_start_.begin(), adj_start_.end(), 0);
    for (std::size_t e : tree_arcs_) {
      ++adj_start_[source_[e] + 1];
      ++adj_start_[target_[e] + 1];
    }
    for (std::size_t u = 0; u <= nodes_; ++u) adj_start_[u + 1] += adj_start_[u];
    fill_pos_.assign(adj_start_.begin(), adj_start_.end() - 1);
    for (std::size_t e : tree_arcs_) {
      adj_[fill_pos_[source_[e]]++] = e;
      adj_[fill_pos_[target_[e]]++] = e;
    }

    std::size_t head = 0;
    std::size_t tail = 0;
    ++stamp_;
    queue_[tail++] = root_;
    seen_[root_] = stamp_;
    parent_[root_] = root_;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    while (head < tail) {
      const std::size_t p = queue_[head++];
      for (std::size_t k = adj_start_[p]; k < adj_start_[p + 1]; ++k) {
        const std::size_t e = adj_[k];
        const std::size_t u = source_[e] == p ? target_[e] : source_[e];
        if (seen_[u] == stamp_) continue;
        seen_[u] = stamp_;
        parent_[u] = p;
        pred_[u] = e;
        depth_[u] = depth_[p] + 1;
        if (source_[e] == u) {
          dir_[u] = kUp;
          pi_[u] = pi_[p] - cost_[e];
        } else {
          dir_[u] = kDown;
          pi_[u] = pi_[p] + cost_[e];
        }
        queue_[tail++] = u;
      }
    }
    if (tail != nodes_ + 1) throw Error(ErrorKind::Internal, "network simplex basis is not a spanning tree");
  }

  std::size_t n_;
  std::size_t m_;
  double tol_;
  double scale_tol_ = 0.0;
  std::size_t nodes_ = 0;
  std::size_t root_ = 0;
  std::size_t real_arcs_ = 0;
  std::size_t block_size_ = 0;
  std::size_t next_arc_ = 0;

  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<signed char> state_;

  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<signed char> dir_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;

  std::vector<std::size_t> tree_arcs_;
  std::vector<std::size_t> adj_start_;
  std::vector<std::size_t> fill_pos_;
  std::vector<std::size_t> adj_;
  std::vector<std::size_t> queue_;
  std::vector<unsigned> seen_;
  unsigned stamp_ = 0;
};

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost, double pivot_tol) {
  if (supply.empty() || demand.empty()) throw Error(ErrorKind::Parameter, "transport problem needs nonempty sides");
  if (cost.size() != supply.size() * demand.size())
    throw Error(ErrorKind::Parameter, "cost matrix has the wrong shape");
  NetworkSimplex ns(supply, demand, cost, pivot_tol);
  TransportResult result = ns.run();
  for (std::size_t i = 0; i < supply.size(); ++i) result.dual += supply[i] * result.phi[i];
  for (std::size_t j = 0; j < demand.size(); ++j) result.dual += demand[j] * result.psi[j];
  return result;
}

}  // namespace eotlab

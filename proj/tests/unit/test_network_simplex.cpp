#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "eotlab/network_simplex.hpp"

using namespace eotlab;

namespace {

void expect_certified(const TransportResult& r, std::span<const double> a, std::span<const double> b,
                      std::span<const double> c) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> rows(n, 0.0);
  std::vector<double> cols(m, 0.0);
  double primal = 0.0;
  for (const auto& f : r.flows) {
    EXPECT_GT(f.mass, 0.0);
    rows[f.i] += f.mass;
    cols[f.j] += f.mass;
    primal += f.mass * c[f.i * m + f.j];
    EXPECT_NEAR(r.phi[f.i] + r.psi[f.j], c[f.i * m + f.j], 1e-9);
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rows[i], a[i], 1e-12);
  for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(cols[j], b[j], 1e-12);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) EXPECT_LE(r.phi[i] + r.psi[j], c[i * m + j] + 1e-9);
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) dual += a[i] * r.phi[i];
  for (std::size_t j = 0; j < m; ++j) dual += b[j] * r.psi[j];
  EXPECT_NEAR(r.primal, primal, 1e-12);
  EXPECT_NEAR(r.dual, dual, 1e-12);
  EXPECT_NEAR(r.primal, r.dual, 1e-9);
  EXPECT_EQ(r.phi[0], 0.0);
}

}  // namespace

TEST(NetworkSimplex, AssignmentMatchesPermutationSearch) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<double> c(n * n);
    for (double& x : c) x = u(rng);
    const std::vector<double> a(n, 1.0 / n);
    const auto r = solve_transport(a, a, c);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]] / n;
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(r.primal, best, 1e-12);
    expect_certified(r, a, a, c);
  }
}

TEST(NetworkSimplex, RandomRectangularInstancesCertified) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 17;
    const std::size_t m = 23;
    std::vector<double> a(n), b(m), c(n * m);
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (double& x : a) x /= sa;
    for (double& x : b) x /= sb;
    // Rebalance the rounding so the totals agree exactly.
    b.back() += std::accumulate(a.begin(), a.end(), 0.0) - std::accumulate(b.begin(), b.end(), 0.0);
    for (double& x : c) x = u(rng);
    expect_certified(solve_transport(a, b, c), a, b, c);
  }
}

TEST(NetworkSimplex, DegenerateIdentityAssignment) {
  const std::size_t n = 50;
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = 0.5 * std::pow((double(i) - double(j)) / n, 2);
  const std::vector<double> a(n, 1.0 / n);
  const auto r = solve_transport(a, a, c);
  EXPECT_NEAR(r.primal, 0.0, 1e-15);
  expect_certified(r, a, a, c);
  for (const auto& f : r.flows) EXPECT_EQ(f.i, f.j);
}

TEST(NetworkSimplex, SingleSourceSplitsMass) {
  const std::vector<double> a{1.0};
  const std::vector<double> b{0.25, 0.75};
  const std::vector<double> c{2.0, 3.0};
  const auto r = solve_transport(a, b, c);
  EXPECT_NEAR(r.primal, 2.75, 1e-15);
  expect_certified(r, a, b, c);
}

#include <benchmark/benchmark.h>

#include <random>

#include "eotlab/detachment.hpp"
#include "eotlab/instances.hpp"
#include "eotlab/network_simplex.hpp"
#include "eotlab/sinkhorn.hpp"

using namespace eotlab;

static void BM_SinkhornDilation(benchmark::State& state) {
  const auto inst = build_instance(builtin_instance("B", static_cast<int>(state.range(0))));
  const double eps = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(solve_schrodinger(inst.mu, inst.nu, eps, SinkhornOptions{}));
}
BENCHMARK(BM_SinkhornDilation)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_NetworkSimplex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n), ys(n);
  for (auto& x : xs) x = u(rng);
  for (auto& y : ys) y = u(rng);
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = 0.5 * (xs[i] - ys[j]) * (xs[i] - ys[j]);
  const std::vector<double> mass(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(mass, mass, cost));
}
BENCHMARK(BM_NetworkSimplex)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_LegendreTransform(benchmark::State& state) {
  const auto grid = uniform_grid(ConvexDomain::box({{0.0, 1.0}}), static_cast<int>(state.range(0)));
  const auto u = PotentialField::from_function(grid, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  for (auto _ : state) benchmark::DoNotOptimize(legendre_transform(u, grid));
}
BENCHMARK(BM_LegendreTransform)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

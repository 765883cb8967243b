#include <benchmark/benchmark.h>

#include <random>

#include "wasser_dual/heisenberg.hpp"
#include "wasser_dual/hopf_lax.hpp"
#include "wasser_dual/kernels.hpp"
#include "wasser_dual/metric_space.hpp"
#include "wasser_dual/slope.hpp"

namespace {

wd::ScalarField random_field(const wd::SpacePtr& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(space->size());
  for (double& x : v) x = unit(rng);
  return wd::ScalarField::from_values(space, std::move(v));
}

void BM_apply_parallel(benchmark::State& state) {
  const auto kernel = wd::torus_heat_kernel(static_cast<std::size_t>(state.range(0)), 0.02);
  const auto f = random_field(kernel.space(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(wd::apply(kernel, std::span<const double>(f.values)));
}
void BM_apply_serial(benchmark::State& state) {
  const auto kernel = wd::torus_heat_kernel(static_cast<std::size_t>(state.range(0)), 0.02);
  const auto f = random_field(kernel.space(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::apply(kernel, f.values));
}

void BM_hopf_lax_parallel(benchmark::State& state) {
  const auto space = wd::unit_interval_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 2);
  const wd::PowerLagrangian L(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(wd::hopf_lax(f, 0.1, L, *space));
}
void BM_hopf_lax_serial(benchmark::State& state) {
  const auto space = wd::unit_interval_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 2);
  const wd::PowerLagrangian L(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::hopf_lax(f, 0.1, L, *space));
}

void BM_slope_parallel(benchmark::State& state) {
  const auto space = wd::torus_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 3);
  for (auto _ : state) benchmark::DoNotOptimize(wd::slope_at_scale(f, *space, 0.05));
}
void BM_slope_serial(benchmark::State& state) {
  const auto space = wd::torus_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 3);
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::slope_at_scale(f, *space, 0.05));
}

void BM_lipschitz_parallel(benchmark::State& state) {
  const auto space = wd::torus_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 4);
  for (auto _ : state) benchmark::DoNotOptimize(wd::lipschitz_constant(f, *space));
}
void BM_lipschitz_serial(benchmark::State& state) {
  const auto space = wd::torus_space(static_cast<std::size_t>(state.range(0)));
  const auto f = random_field(space, 4);
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::lipschitz_constant(f.values, *space));
}

void BM_shortest_paths_parallel(benchmark::State& state) {
  const auto graph = wd::cycle_graph(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wd::shortest_path_space(graph));
}
void BM_shortest_paths_serial(benchmark::State& state) {
  const auto graph = wd::cycle_graph(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::floyd_warshall(graph));
}

wd::SDEConfig sde_config(std::size_t samples) {
  wd::SDEConfig c;
  c.t = 1.0;
  c.steps = 200;
  c.samples = samples;
  c.seed = 7;
  return c;
}
void BM_diffusion_parallel(benchmark::State& state) {
  const auto c = sde_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wd::sample_diffusion(c));
}
void BM_diffusion_serial(benchmark::State& state) {
  const auto c = sde_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wd::serial::sample_diffusion(c));
}

}  // namespace

BENCHMARK(BM_apply_parallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_apply_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_hopf_lax_parallel)->Arg(200)->Arg(800);
BENCHMARK(BM_hopf_lax_serial)->Arg(200)->Arg(800);
BENCHMARK(BM_slope_parallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_slope_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_lipschitz_parallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_lipschitz_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_shortest_paths_parallel)->Arg(128)->Arg(256);
BENCHMARK(BM_shortest_paths_serial)->Arg(128)->Arg(256);
BENCHMARK(BM_diffusion_parallel)->Arg(2000);
BENCHMARK(BM_diffusion_serial)->Arg(2000);

BENCHMARK_MAIN();

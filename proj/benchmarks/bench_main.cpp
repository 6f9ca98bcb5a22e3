#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "avgbound/kepler/kepler.hpp"
#include "avgbound/numerics/interpolation.hpp"
#include "avgbound/runner/runner.hpp"

using namespace avgbound;

namespace {

void BM_ClosedField(benchmark::State& state) {
  double th = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kepler::j2_field(3.0, 0.6640, 0.2, th));
    th += 1e-3;
  }
}
BENCHMARK(BM_ClosedField);

void BM_PotentialField(benchmark::State& state) {
  const auto planet = kepler::earth();
  const auto pot = kepler::j2_potential(planet);
  double th = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kepler::field_from_potential({3.0, 0.6640, 0.2, th}, th, planet, pot));
    th += 1e-3;
  }
}
BENCHMARK(BM_PotentialField);

void BM_Interpolant(benchmark::State& state) {
  const auto mode = state.range(0) == 0 ? numerics::InterpMode::cubic : numerics::InterpMode::lagrange;
  const std::size_t n = 101;
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = 30.0 * static_cast<double>(k) / (n - 1);
    y[k] = std::sin(0.3 * x[k]) + 0.01 * x[k];
  }
  const numerics::Interpolant p(mode, x, y);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p(t));
    t = t > 29.9 ? 0.0 : t + 0.0137;
  }
}
BENCHMARK(BM_Interpolant)->Arg(0)->Arg(1);

void BM_NOperation(benchmark::State& state) {
  auto cfg = j2::preset_polar();
  cfg.orbits = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(runner::run_n_operation(cfg).estimator.completed);
}
BENCHMARK(BM_NOperation)->Arg(3000)->Arg(60000)->Unit(benchmark::kMillisecond);

void BM_LOperationChunk(benchmark::State& state) {
  auto cfg = j2::preset_polar();
  cfg.orbits = 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(runner::run_l_operation(cfg, {10000.0, 64}).stats.accepted);
}
BENCHMARK(BM_LOperationChunk)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

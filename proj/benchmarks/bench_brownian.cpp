#include <benchmark/benchmark.h>

#include "ozlab/brownian.hpp"

using namespace ozlab;

static void BM_BesselKIntegral(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(brownian::bessel_k_integral(0.5, 2.0).value);
}
BENCHMARK(BM_BesselKIntegral);

static void BM_BrownianGreen(benchmark::State& state) {
  SpdMatrix lam(3);
  for (int i = 0; i < 3; ++i) lam(i, i) = 0.4;
  const VecD x{12, 0, 0}, eta{0.26, 0, 0};
  for (auto _ : state) benchmark::DoNotOptimize(brownian::brownian_green(x, eta, lam));
}
BENCHMARK(BM_BrownianGreen);

BENCHMARK_MAIN();

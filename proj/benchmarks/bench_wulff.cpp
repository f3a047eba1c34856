#include <benchmark/benchmark.h>

#include "ozlab/wulff.hpp"

using namespace ozlab;

static void BM_Mass(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::nn, 3);
  for (auto _ : state) benchmark::DoNotOptimize(wulff::mass(kernel, 0.7));
}
BENCHMARK(BM_Mass);

static void BM_OptimalTilt(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::linf_box, 2);
  const VecD x{2.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(wulff::optimal_tilt(kernel, 0.4, x).norm_value);
}
BENCHMARK(BM_OptimalTilt);

static void BM_NormBall(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::nn, 2);
  for (auto _ : state) {
    auto ball = wulff::norm_ball(kernel, 0.5, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(ball.back().v1);
  }
}
BENCHMARK(BM_NormBall)->Arg(32)->Arg(128);

BENCHMARK_MAIN();

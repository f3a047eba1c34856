#include <benchmark/benchmark.h>

#include "ozlab/lattice.hpp"

using namespace ozlab;

static void BM_SeriesBox2D(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::nn, 2);
  const double z = 0.6;
  for (auto _ : state) {
    auto table = lattice::green_series_box(kernel, z, static_cast<int>(state.range(0)),
                                           {.tol = 1e-10});
    benchmark::DoNotOptimize(table.at({1, 0}));
  }
}
BENCHMARK(BM_SeriesBox2D)->Arg(4)->Arg(8)->Arg(16);

static void BM_Quadrature3D(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::nn, 3);
  for (auto _ : state) {
    auto eval = lattice::green_quadrature(kernel, 0.5, {3, 0, 0},
                                          static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_Quadrature3D)->Arg(32)->Arg(64)->Arg(128);

static void BM_Quadrature2D(benchmark::State& state) {
  const Kernel kernel = make_named_kernel(NamedKernel::nn, 2);
  for (auto _ : state) {
    auto eval = lattice::green_quadrature(kernel, 0.9, {5, 5},
                                          static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_Quadrature2D)->Arg(256)->Arg(512);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spdelab/green_kernel.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/rate_function.hpp"
#include "spdelab/solvers.hpp"

using namespace spdelab;

namespace {

SpaceField sine(const GridSpec& g) {
  return SpaceField(g, [](double x) { return std::sin(std::numbers::pi * x); });
}

void BM_ThomasSolve(benchmark::State& state) {
  const GridSpec g(static_cast<std::size_t>(state.range(0)), 1024, 1.0);
  const ImplicitDiffusion op(g);
  std::vector<double> rhs(g.nx(), 1.0), x(g.nx());
  for (auto _ : state) {
    op.solve(rhs, x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ThomasSolve)->Arg(64)->Arg(256)->Arg(1024);

void BM_SpdePath(benchmark::State& state) {
  const GridSpec g(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1.0);
  SimParams p(g, burgers(), sine(g));
  p.epsilon = 1e-2;
  const NoiseRealization noise = sample_sheet(SeedSpec{1, 0}, g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_spde(p, noise).path.raw().data());
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_SpdePath)->Args({32, 1024})->Args({64, 4096})->Unit(benchmark::kMillisecond);

void BM_SampleSheet(benchmark::State& state) {
  const GridSpec g(64, 4096, 1.0);
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_sheet(SeedSpec{1, k++}, g).raw().data());
}
BENCHMARK(BM_SampleSheet)->Unit(benchmark::kMillisecond);

void BM_GreenKernel(benchmark::State& state) {
  const double t = state.range(0) == 0 ? 1e-3 : 0.3;  // image branch, spectral branch
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(green(t, x, 0.45));
    x = x < 0.9 ? x + 1e-3 : 0.1;
  }
}
BENCHMARK(BM_GreenKernel)->Arg(0)->Arg(1);

void BM_RateCG(benchmark::State& state) {
  const GridSpec g(16, static_cast<std::size_t>(state.range(0)), 0.5);
  SimParams p(g, burgers(), sine(g));
  const PathField base = solve_deterministic(p).path;
  const SkeletonOperator op(p.coefficients, base);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Control h(g);
  for (double& v : h.raw()) v = nd(rng);
  const PathField target = op.forward(h);
  for (auto _ : state) {
    const RateCertificate c = evaluate_rate(target, op, {.regularization = 1e-6, .tolerance = 1e-10});
    state.counters["cg_iterations"] = c.cg_iterations;
  }
}
BENCHMARK(BM_RateCG)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#include <random>

#include <benchmark/benchmark.h>

#include "scoredyn/analysis.hpp"
#include "scoredyn/dynamics.hpp"
#include "scoredyn/loss.hpp"
#include "scoredyn/special_functions.hpp"

using namespace scoredyn;

namespace {

EmpiricalMeasure random_measure(int d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vector> pts;
  for (int j = 0; j < n; ++j) {
    Vector p(d);
    for (int i = 0; i < d; ++i) p[i] = normal(rng);
    pts.push_back(p);
  }
  return EmpiricalMeasure(pts);
}

void BM_Phi(benchmark::State& state) {
  const double z = static_cast<double>(state.range(0));
  double s = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi({0.01, 10.0, s, z}));
    s = s == 0.5 ? 0.51 : 0.5;
  }
}
BENCHMARK(BM_Phi)->Arg(0)->Arg(1)->Arg(100)->Arg(10000);

void BM_SStar(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ScoreField f(ModelConfig{2, 1.0, 0.01, 10.0}, random_measure(2, n, 1));
  Vector x(2);
  x << 0.3, -0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.s_star(x));
    x[0] += 1e-9;
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SStar)->RangeMultiplier(4)->Range(1, 256)->Complexity(benchmark::oN);

void BM_Hessian(benchmark::State& state) {
  const ScoreField f(ModelConfig{3, 1.0, 0.01, 10.0}, random_measure(3, 16, 2));
  Vector x = Vector::Constant(3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(f.hess_big_l(f.config().lyapunov_shape(), x));
}
BENCHMARK(BM_Hessian);

void BM_FlowToEquilibrium(benchmark::State& state) {
  const ScoreField f(ModelConfig{2, 1.0, 0.1, 2.0}, random_measure(2, 5, 3));
  FlowOptions opts;
  opts.diagnostics = false;
  Vector x0(2);
  x0 << 2.0, 1.5;
  for (auto _ : state) benchmark::DoNotOptimize(flow_integrate(f, Perturbation::zero(), x0, 1e3, StepControl{}, opts));
}
BENCHMARK(BM_FlowToEquilibrium)->Unit(benchmark::kMillisecond);

void BM_McObjective(benchmark::State& state) {
  const ScoreField f(ModelConfig{1, 1.0, 0.1, 2.0}, random_measure(1, 3, 4));
  const Schedule sched = Schedule::geometric(0.01, 1.0, 0.1, 2.0);
  McSampling sampling;
  sampling.n_t = 10'000;
  sampling.parallelism.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mc_objective(f, FieldSpec::optimal(), sched, sampling));
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_McObjective)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_EquilibriumSearch(benchmark::State& state) {
  const ScoreField f(ModelConfig{2, 1.0, 1e-3, 10.0}, random_measure(2, 5, 5));
  for (auto _ : state) benchmark::DoNotOptimize(find_equilibrium_near(f, f.measure().point(0), 1.0));
}
BENCHMARK(BM_EquilibriumSearch);

}  // namespace
BENCHMARK_MAIN();

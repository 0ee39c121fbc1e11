#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "gperot/config.hpp"
#include "gperot/optimizer.hpp"
#include "gperot/spectral.hpp"

using namespace gperot;

namespace {

ModelSpec model1(int m) {
  ModelSpec s = preset("model1").model;
  s.elements_per_dir = m;
  return s;
}

// a few inverse-iteration steps off the constant guess; cached per mesh size
struct Fixture {
  std::unique_ptr<GpeProblem> prob;
  PFrame phi;
};

Fixture& fixture(int m) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  Fixture f;
  f.prob = std::make_unique<GpeProblem>(build_discretization(model1(m)));
  RunOptions opt;
  opt.max_iters = 10;
  opt.warm_start = false;
  opt.stop_residual = 1e-300;
  f.phi = run(*f.prob, opt).state;
  return cache.emplace(m, std::move(f)).first->second;
}

void BM_Discretize(benchmark::State& state) {
  const ModelSpec s = model1(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_discretization(s));
}
BENCHMARK(BM_Discretize)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Linearize(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(linearize(*f.prob, f.phi));
}
BENCHMARK(BM_Linearize)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void metric_solve(benchmark::State& state, const MetricSelector& sel) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  const Linearization lin = linearize(*f.prob, f.phi);
  const MetricOperator op(lin, sel);
  int iters = 0;
  for (auto _ : state) {
    const MetricSolve s = op.solve(lin.M_phi, 1e-8);
    iters = s.cg_iters;
    benchmark::DoNotOptimize(s.x.data());
  }
  state.counters["cg_iters"] = iters;
}

void BM_SolveEnergyAdaptive(benchmark::State& state) { metric_solve(state, EnergyAdaptive{}); }
BENCHMARK(BM_SolveEnergyAdaptive)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SolveLagrangian(benchmark::State& state) { metric_solve(state, Lagrangian{0.5}); }
BENCHMARK(BM_SolveLagrangian)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  const Linearization lin = linearize(*f.prob, f.phi);
  for (auto _ : state) benchmark::DoNotOptimize(step(lin, EnergyAdaptive{}, 1.0, 1e-8));
}
BENCHMARK(BM_Step)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LowestEigenpairs(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  const Linearization lin = linearize(*f.prob, f.phi);
  SpectralOptions opt;
  opt.tol = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(eigs_component_A(lin, 0, 4, opt));
}
BENCHMARK(BM_LowestEigenpairs)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

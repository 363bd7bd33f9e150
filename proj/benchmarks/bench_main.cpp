#include <benchmark/benchmark.h>

#include "nhlaw/chains.hpp"
#include "nhlaw/characteristics.hpp"
#include "nhlaw/dyson.hpp"
#include "nhlaw/ensemble.hpp"
#include "nhlaw/spectral.hpp"
#include "nhlaw/stability.hpp"

using namespace nhlaw;

namespace {

Mat draw(int n) { return sample({n, Field::Complex, Distribution::Gaussian, 1}, 0).x; }

void BM_SolveM(benchmark::State& state) {
  double e = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_m(cd(0.7, 0.2), cd(e, 1e-3)));
    e = e > 2.0 ? -2.0 : e + 1e-3;
  }
}
BENCHMARK(BM_SolveM);

void BM_Density(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(density(1.1, 0.4));
}
BENCHMARK(BM_Density);

void BM_Quantiles(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(quantiles(1.0, n, {1, 2, 3}));
}
BENCHMARK(BM_Quantiles)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Eigensystem(benchmark::State& state) {
  const Mat x = draw(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigensystem(x));
}
BENCHMARK(BM_Eigensystem)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_OverlapDecay(benchmark::State& state) {
  const EigenSystem e = eigensystem(draw(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(overlap_decay_statistic(e));
}
BENCHMARK(BM_OverlapDecay)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ResolventFactory(benchmark::State& state) {
  const Mat x = draw(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ResolventFactory(x, cd(0.3, 0.1)));
}
BENCHMARK(BM_ResolventFactory)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TwoChain(benchmark::State& state) {
  const Mat x = draw(static_cast<int>(state.range(0)));
  const ResolventFactory f1(x, 0.3), f2(x, cd(0.5, 0.4));
  const ChainPair pair(f1, f2);
  for (auto _ : state) benchmark::DoNotOptimize(pair.two_chain(0.01, block_f(), -0.02, block_eminus()));
}
BENCHMARK(BM_TwoChain)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_StabilityM121(benchmark::State& state) {
  const PointData p1 = axis_point(0.3, 1e-3), p2 = axis_point(cd(0.2, 0.5), -2e-3);
  for (auto _ : state) benchmark::DoNotOptimize(m121(p1, block_f(), p2, block_eminus()));
}
BENCHMARK(BM_StabilityM121);

void BM_FlowForward(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(flow_forward(0.5, 0.2, 0.2));
}
BENCHMARK(BM_FlowForward)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "carbonx/stats.hpp"
#include "carbonx/synth.hpp"

namespace {

void BM_ReduceSumDeterministic(benchmark::State& state) {
  carbonx::synth::SplitMix64 rng(3);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(carbonx::stats::reduce_sum_deterministic(v));
  }
}
BENCHMARK(BM_ReduceSumDeterministic)->Arg(1 << 16)->Arg(1 << 22);

}  // namespace

BENCHMARK_MAIN();

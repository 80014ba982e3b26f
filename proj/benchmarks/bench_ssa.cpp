#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "carbonx/ssa.hpp"

namespace {

std::vector<double> synthetic_series(int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t)
    s[static_cast<std::size_t>(t)] =
        100.0 * std::sin(2.0 * M_PI * t / 12.0) + 0.01 * t + std::sin(0.7 * t);
  return s;
}

void BM_SsaSplit(benchmark::State& state) {
  const auto series = synthetic_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto d = carbonx::ssa::ssa_split(series);
    benchmark::DoNotOptimize(d.anomaly.data());
  }
}
BENCHMARK(BM_SsaSplit)->Arg(600)->Arg(1200)->Arg(3012)->Unit(benchmark::kMillisecond);

void BM_Embed(benchmark::State& state) {
  const auto series = synthetic_series(1200);
  for (auto _ : state) {
    auto x = carbonx::ssa::embed(series, 120);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Embed);

}  // namespace

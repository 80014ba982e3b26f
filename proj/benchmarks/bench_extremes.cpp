#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "carbonx/extremes.hpp"
#include "carbonx/synth.hpp"

namespace {

void BM_DetectTces(benchmark::State& state) {
  carbonx::synth::SplitMix64 rng(7);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(state.range(0)));
  for (auto& m : mask) m = rng.uniform01() < 0.1 ? 1 : 0;
  for (auto _ : state) {
    auto events = carbonx::extremes::detect_tces(mask, carbonx::extremes::Sign::Negative);
    benchmark::DoNotOptimize(events.data());
  }
}
BENCHMARK(BM_DetectTces)->Arg(300)->Arg(3000);

void BM_ThresholdQ(benchmark::State& state) {
  carbonx::synth::SplitMix64 rng(11);
  std::vector<double> anoms(static_cast<std::size_t>(state.range(0)));
  for (auto& a : anoms) a = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(carbonx::extremes::threshold_q(anoms));
  }
}
BENCHMARK(BM_ThresholdQ)->Arg(19200)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace

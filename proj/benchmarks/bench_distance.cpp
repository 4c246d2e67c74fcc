#include <benchmark/benchmark.h>

#include "leadvel/distance.hpp"
#include "leadvel/rng.hpp"

using namespace leadvel;

namespace {

DistanceSamples make_samples(size_t n, double contamination) {
  Rng rng(99);
  DistanceSamples s;
  s.source_box = BoundingBox{0, 0, static_cast<int>(n), 1};
  s.valid_fraction = 1.0;
  const auto far_count = static_cast<size_t>(static_cast<double>(n) * contamination);
  for (size_t i = 0; i < n - far_count; ++i) s.values.push_back(20.0 + 0.4 * rng.gaussian());
  for (size_t i = 0; i < far_count; ++i) s.values.push_back(45.0 + 3.0 * rng.gaussian());
  return s;
}

}  // namespace

static void KdeEstimate(benchmark::State& state) {
  const auto samples = make_samples(static_cast<size_t>(state.range(0)), 0.3);
  KdeConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kde_estimate(samples, cfg));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(KdeEstimate)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void ResampledKdeEstimate(benchmark::State& state) {
  const auto samples = make_samples(static_cast<size_t>(state.range(0)), 0.3);
  KdeConfig cfg;
  cfg.rng_seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resampled_kde_estimate(samples, cfg));
  }
}
BENCHMARK(ResampledKdeEstimate)->Arg(1024)->Arg(8192);

static void ModeEstimate(benchmark::State& state) {
  const auto samples = make_samples(static_cast<size_t>(state.range(0)), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mode_estimate(samples, 0.5));
  }
}
BENCHMARK(ModeEstimate)->Arg(1024)->Arg(8192);

static void SilvermanBandwidth(benchmark::State& state) {
  const auto samples = make_samples(4096, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(silverman_bandwidth(samples));
  }
}
BENCHMARK(SilvermanBandwidth);

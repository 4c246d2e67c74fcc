#include <benchmark/benchmark.h>

#include "leadvel/rng.hpp"
#include "leadvel/tracking.hpp"

using namespace leadvel;

namespace {

GrayImage noise_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img;
  img.width = w;
  img.height = h;
  img.values.resize(static_cast<size_t>(w) * h);
  for (auto& v : img.values) v = static_cast<std::uint8_t>(rng.index_below(256));
  return img;
}

}  // namespace

static void NccTrackStep(benchmark::State& state) {
  const int radius = static_cast<int>(state.range(0));
  const GrayImage base = noise_image(640, 400, 1);
  const GrayImage next = noise_image(640, 400, 2);
  const BoundingBox box{300, 180, 64, 48};
  for (auto _ : state) {
    TrackerState tracker = init_tracker(base, box, radius);
    benchmark::DoNotOptimize(track_next(tracker, next));
  }
  state.SetComplexityN(radius);
}
BENCHMARK(NccTrackStep)->RangeMultiplier(2)->Range(4, 32)->Complexity()->Unit(benchmark::kMillisecond);

static void TrackerInit(benchmark::State& state) {
  const GrayImage base = noise_image(640, 400, 3);
  const BoundingBox box{300, 180, 64, 48};
  for (auto _ : state) {
    benchmark::DoNotOptimize(init_tracker(base, box, 16));
  }
}
BENCHMARK(TrackerInit);

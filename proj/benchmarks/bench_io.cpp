#include <benchmark/benchmark.h>

#include "leadvel/dataset_io.hpp"
#include "leadvel/synthetic.hpp"

using namespace leadvel;

static void DisparityPgmDecode(benchmark::State& state) {
  DisparityMap map;
  map.width = 640;
  map.height = 400;
  map.values.assign(640 * 400, 24.5f);
  const auto bytes = write_disparity_pgm(map);
  for (auto _ : state) {
    benchmark::DoNotOptimize(read_disparity_pgm(bytes));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(bytes.size()));
}
BENCHMARK(DisparityPgmDecode);

static void DisparityPgmEncode(benchmark::State& state) {
  DisparityMap map;
  map.width = 640;
  map.height = 400;
  map.values.assign(640 * 400, 24.5f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(write_disparity_pgm(map));
  }
}
BENCHMARK(DisparityPgmEncode);

static void GenerateScene(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.n_frames = static_cast<int>(state.range(0));
  cfg.image_width = 224;
  cfg.image_height = 144;
  cfg.rig = CameraRig{0.35, 450.0};
  cfg.noise_sigma_px = 0.5;
  cfg.contamination_fraction = 0.3;
  cfg.background_distance_m = 40.0;
  cfg.rng_seed = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_scene(cfg));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(GenerateScene)->RangeMultiplier(2)->Range(8, 64)->Complexity()->Unit(benchmark::kMillisecond);

#include <benchmark/benchmark.h>

#include "leadvel/gbdt.hpp"
#include "leadvel/rng.hpp"

using namespace leadvel;

namespace {

void make_rows(size_t n, size_t features, std::vector<std::vector<double>>& rows,
               std::vector<double>& targets) {
  Rng rng(7);
  rows.clear();
  targets.clear();
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> row(features);
    for (auto& v : row) v = rng.gaussian();
    double y = row[0] * 1.5 - row[1 % features] + 0.1 * rng.gaussian();
    rows.push_back(std::move(row));
    targets.push_back(y);
  }
}

}  // namespace

static void GbdtTrain(benchmark::State& state) {
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  make_rows(static_cast<size_t>(state.range(0)), 21, rows, targets);
  GbdtParams params;
  params.rounds = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_gbdt(rows, targets, params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(GbdtTrain)->RangeMultiplier(4)->Range(512, 8192)->Complexity()->Unit(benchmark::kMillisecond);

static void GbdtPredict(benchmark::State& state) {
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  make_rows(2048, 21, rows, targets);
  GbdtParams params;
  params.rounds = 200;
  const GbdtModel model = train_gbdt(rows, targets, params);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_gbdt(model, rows[i++ % rows.size()]));
  }
}
BENCHMARK(GbdtPredict);

static void GbdtSerialize(benchmark::State& state) {
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  make_rows(2048, 21, rows, targets);
  GbdtParams params;
  params.rounds = 100;
  const GbdtModel model = train_gbdt(rows, targets, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gbdt_to_json(model));
  }
  state.SetLabel(std::to_string(gbdt_to_json(model).size()) + " bytes");
}
BENCHMARK(GbdtSerialize)->Unit(benchmark::kMillisecond);

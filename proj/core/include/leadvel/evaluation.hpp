#pragma once

#include <span>
#include <string>
#include <vector>

#include "leadvel/distance.hpp"
#include "leadvel/gbdt.hpp"
#include "leadvel/velocity.hpp"

namespace leadvel {

// Pooled over all frames of all scenes: one global mean of squared errors,
// not a mean of per-scene scores.
double rmse(std::span<const double> predictions, std::span<const double> truths);

// Incremental pooled accumulator for multi-scene scoring.
struct PooledError {
  double sum_squared = 0.0;
  size_t count = 0;

  void add(double prediction, double truth);
  void merge(const PooledError& other);
  double rmse() const;
};

struct AblationCombo {
  std::string tracker = "oracle";  // ncc | oracle
  Estimator estimator = Estimator::kde;
  ModelKind model = ModelKind::relvel;
};

struct AblationSpec {
  std::vector<std::string> train_dirs;
  std::vector<std::string> test_dirs;
  std::vector<AblationCombo> combos;
  DistanceConfig distance;
  GbdtParams gbdt;
  int lags = kDefaultLagCount;
  int search_radius_px = 32;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SceneScore {
  std::string scene_id;
  double rmse = 0.0;
  size_t frames = 0;
};

struct AblationRow {
  AblationCombo combo;
  double rmse = 0.0;
  size_t frames_scored = 0;
  double wall_time_s = 0.0;
  std::vector<SceneScore> per_scene;
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

AblationSpec ablation_spec_from_json(const std::string& text);

// Trains (where the combo needs it) on the train scenes, predicts the test
// scenes, and scores pooled RMSE per combination. Scenes are evaluated in
// parallel with results reduced in list order, so reports are deterministic.
AblationReport run_ablation(const AblationSpec& spec);

std::string report_table(const AblationReport& report);
std::string report_csv(const AblationReport& report);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

}  // namespace leadvel

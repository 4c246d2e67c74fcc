#include "doctest.h"

#include <cmath>
#include <sstream>

#include "leadvel/errors.hpp"
#include "leadvel/evaluation.hpp"
#include "leadvel/rng.hpp"
#include "leadvel/synthetic.hpp"

#include "test_util.hpp"

using namespace leadvel;

namespace {

// Two short noise-free scenes on disk, train-style annotations everywhere.
std::vector<std::string> write_scene_dirs(const test::TempDir& dir, int count,
                                          std::uint64_t seed0, double noise = 0.0,
                                          double contamination = 0.0) {
  std::vector<std::string> paths;
  for (int i = 0; i < count; ++i) {
    ScenarioConfig cfg;
    cfg.scene_id = "eval_" + std::to_string(i);
    cfg.n_frames = 12;
    cfg.image_width = 64;
    cfg.image_height = 48;
    cfg.rig = CameraRig{0.35, 220.0};
    cfg.initial_gap_m = 16.0 + 2.0 * i;
    cfg.lead.v0_mps = 15.0;
    cfg.ego.v0_mps = 15.0;
    cfg.noise_sigma_px = noise;
    cfg.contamination_fraction = contamination;
    cfg.background_distance_m = 40.0;
    cfg.rng_seed = seed0 + static_cast<std::uint64_t>(i);
    const auto generated = generate_scene(cfg);
    const auto path = dir.path() / cfg.scene_id;
    save_scene(generated.bundle, path);
    paths.push_back(path.string());
  }
  return paths;
}

AblationReport strip_wall_time(AblationReport report) {
  for (auto& row : report.rows) row.wall_time_s = 0.0;
  return report;
}

bool reports_equal(const AblationReport& a, const AblationReport& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    const AblationRow& x = a.rows[i];
    const AblationRow& y = b.rows[i];
    if (x.rmse != y.rmse || x.frames_scored != y.frames_scored) return false;
    if (x.per_scene.size() != y.per_scene.size()) return false;
    for (size_t s = 0; s < x.per_scene.size(); ++s) {
      if (x.per_scene[s].scene_id != y.per_scene[s].scene_id ||
          x.per_scene[s].rmse != y.per_scene[s].rmse ||
          x.per_scene[s].frames != y.per_scene[s].frames) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("rmse arithmetic") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(rmse(a, a) == 0.0);

  const std::vector<double> preds{1.0, 2.0};
  const std::vector<double> truths{2.0, 4.0};
  CHECK(rmse(preds, truths) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));

  // constant offset epsilon gives exactly epsilon
  std::vector<double> shifted;
  for (double v : a) shifted.push_back(v + 0.375);
  CHECK(rmse(shifted, a) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("rmse errors") {
  const std::vector<double> one{1.0};
  const std::vector<double> two{1.0, 2.0};
  try {
    rmse(one, two);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::length_mismatch);
  }
  try {
    rmse(std::vector<double>{}, std::vector<double>{});
    FAIL("expected Empty");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_input);
  }
}

TEST_CASE("pooled rmse equals the frame-weighted per-scene identity") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    // random scenes with random sizes
    PooledError pooled;
    double weighted_mse_sum = 0.0;
    size_t total = 0;
    const size_t scenes = 1 + rng.index_below(6);
    for (size_t s = 0; s < scenes; ++s) {
      const size_t frames = 1 + rng.index_below(40);
      PooledError scene_error;
      for (size_t f = 0; f < frames; ++f) {
        const double pred = rng.uniform(0, 30);
        const double truth = rng.uniform(0, 30);
        pooled.add(pred, truth);
        scene_error.add(pred, truth);
      }
      const double scene_rmse = scene_error.rmse();
      weighted_mse_sum += static_cast<double>(frames) * scene_rmse * scene_rmse;
      total += frames;
    }
    const double reconstructed = std::sqrt(weighted_mse_sum / static_cast<double>(total));
    CHECK(pooled.rmse() == doctest::Approx(reconstructed).epsilon(1e-12));
  }
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(44);
  for (int i = 0; i < 2000; ++i) {
    double v;
    switch (i % 4) {
      case 0: v = rng.gaussian() * 1e-7; break;
      case 1: v = rng.gaussian(); break;
      case 2: v = rng.gaussian() * 1e9; break;
      default: v = rng.uniform(0, 1); break;
    }
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("ablation spec parses from json") {
  const std::string text = R"({
    "train_dirs": ["a", "b"],
    "test_dirs": ["c"],
    "combinations": [["oracle", "kde", "relvel"], ["ncc", "mode", "gbdt"]],
    "distance": {"mode_bin_width_m": 0.25, "grid_points": 256, "rng_seed": 3},
    "gbdt": {"rounds": 50, "learning_rate": 0.2},
    "lags": 12,
    "threads": 2
  })";
  const AblationSpec spec = ablation_spec_from_json(text);
  CHECK(spec.train_dirs == std::vector<std::string>{"a", "b"});
  CHECK(spec.test_dirs == std::vector<std::string>{"c"});
  REQUIRE(spec.combos.size() == 2);
  CHECK(spec.combos[0].tracker == "oracle");
  CHECK(spec.combos[0].estimator == Estimator::kde);
  CHECK(spec.combos[0].model == ModelKind::relvel);
  CHECK(spec.combos[1].tracker == "ncc");
  CHECK(spec.combos[1].model == ModelKind::gbdt);
  CHECK(spec.distance.mode_bin_width_m == 0.25);
  CHECK(spec.distance.kde.grid_points == 256);
  CHECK(spec.gbdt.rounds == 50);
  CHECK(spec.lags == 12);
  CHECK(spec.threads == 2);

  CHECK_THROWS_AS(ablation_spec_from_json("{"), Error);
  CHECK_THROWS_AS(ablation_spec_from_json(R"({"combinations": [["x","kde","relvel"]]})"), Error);
}

TEST_CASE("noise-free relvel ablation scores near zero") {
  test::TempDir dir("abl");
  const auto dirs = write_scene_dirs(dir, 2, 100);
  AblationSpec spec;
  spec.test_dirs = dirs;
  spec.combos.push_back(AblationCombo{"oracle", Estimator::kde, ModelKind::relvel});
  const AblationReport report = run_ablation(spec);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].rmse < 1e-3);
  CHECK(report.rows[0].frames_scored == 24);
  CHECK(report.rows[0].per_scene.size() == 2);
}

TEST_CASE("ablation runs are deterministic, threads included") {
  test::TempDir dir("det");
  const auto dirs = write_scene_dirs(dir, 3, 300, 0.4, 0.2);
  AblationSpec spec;
  spec.train_dirs = {dirs[0]};
  spec.test_dirs = {dirs[1], dirs[2]};
  spec.combos.push_back(AblationCombo{"oracle", Estimator::resampled, ModelKind::relvel});
  spec.combos.push_back(AblationCombo{"oracle", Estimator::kde, ModelKind::linear});
  spec.threads = 1;
  const auto first = strip_wall_time(run_ablation(spec));
  spec.threads = 4;
  const auto second = strip_wall_time(run_ablation(spec));
  CHECK(reports_equal(first, second));
}

TEST_CASE("empty test list is an Empty error") {
  AblationSpec spec;
  spec.combos.push_back(AblationCombo{});
  try {
    run_ablation(spec);
    FAIL("expected Empty");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_input);
  }
}

TEST_CASE("reports render as table and csv, and csv reparses identically") {
  test::TempDir dir("csv");
  const auto dirs = write_scene_dirs(dir, 2, 700, 0.3, 0.1);
  AblationSpec spec;
  spec.test_dirs = dirs;
  spec.combos.push_back(AblationCombo{"oracle", Estimator::kde, ModelKind::relvel});
  spec.combos.push_back(AblationCombo{"oracle", Estimator::mode, ModelKind::relvel});
  const AblationReport report = run_ablation(spec);

  const std::string table = report_table(report);
  CHECK(table.find("tracker") != std::string::npos);
  CHECK(table.find("kde") != std::string::npos);
  CHECK(table.find("not comparable") != std::string::npos);

  const std::string csv = report_csv(report);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "tracker,estimator,model,rmse,frames_scored,wall_time_s");
  size_t row = 0;
  while (std::getline(lines, line)) {
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    const auto third_comma = line.find(',', second_comma + 1);
    const auto fourth_comma = line.find(',', third_comma + 1);
    const std::string rmse_text = line.substr(third_comma + 1, fourth_comma - third_comma - 1);
    CHECK(std::stod(rmse_text) == report.rows[row].rmse);
    ++row;
  }
  CHECK(row == 2);
}

TEST_SUITE_END();

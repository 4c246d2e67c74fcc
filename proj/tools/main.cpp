// leadvel: stereo lead-vehicle velocity pipeline.
//
// Subcommands: generate, track, distance, train, predict, evaluate, ablate.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leadvel/dataset_io.hpp"
#include "leadvel/distance.hpp"
#include "leadvel/errors.hpp"
#include "leadvel/evaluation.hpp"
#include "leadvel/synthetic.hpp"
#include "leadvel/tracking.hpp"
#include "leadvel/velocity.hpp"

namespace fs = std::filesystem;
using namespace leadvel;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorKind::missing_file, path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    raise(ErrorKind::io_failure, "while writing " + path.string());
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
}

// ---------------- shared option bundles ----------------

struct DistanceFlags {
  std::string estimator = "kde";
  int kde_grid = 512;
  std::optional<double> kde_bandwidth;
  int resample_count = 1000;
  std::uint64_t seed = 0;
  double mode_bin_width = 0.5;

  DistanceConfig to_config() const {
    DistanceConfig cfg;
    cfg.estimator = estimator_from_name(estimator);
    cfg.kde.grid_points = kde_grid;
    cfg.kde.fixed_bandwidth_m = kde_bandwidth;
    cfg.kde.resample_count = resample_count;
    cfg.kde.rng_seed = seed;
    cfg.mode_bin_width_m = mode_bin_width;
    return cfg;
  }
};

void add_distance_flags(CLI::App* cmd, DistanceFlags& flags) {
  cmd->add_option("--estimator", flags.estimator, "Distance aggregator: mode|kde|resampled")
      ->check(CLI::IsMember({"mode", "kde", "resampled"}));
  cmd->add_option("--kde-grid", flags.kde_grid, "KDE evaluation grid points")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--kde-bandwidth", flags.kde_bandwidth,
                  "Fixed KDE bandwidth in meters (default: Silverman's rule)");
  cmd->add_option("--resample-count", flags.resample_count,
                  "Draws for the resampled KDE variant")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "RNG seed for the resampled KDE variant");
  cmd->add_option("--mode-bin-width", flags.mode_bin_width,
                  "Histogram bin width in meters for the mode estimator")
      ->check(CLI::PositiveNumber);
}

struct TrackerFlags {
  std::string tracker = "oracle";
  int radius = 32;
};

void add_tracker_flags(CLI::App* cmd, TrackerFlags& flags) {
  cmd->add_option("--tracker", flags.tracker, "Box source: ncc|oracle")
      ->check(CLI::IsMember({"ncc", "oracle"}));
  cmd->add_option("--radius", flags.radius, "NCC search radius in pixels")
      ->check(CLI::PositiveNumber);
}

struct GbdtFlags {
  GbdtParams params;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rounds", params.rounds, "Boosting rounds");
    cmd->add_option("--learning-rate", params.learning_rate, "Shrinkage per round");
    cmd->add_option("--max-leaves", params.max_leaves, "Leaves per tree");
    cmd->add_option("--min-samples-leaf", params.min_samples_leaf, "Minimum rows per leaf");
    cmd->add_option("--bins", params.bins, "Histogram bins per feature");
    cmd->add_option("--min-gain", params.min_gain, "Minimum split gain");
  }
};

std::string flags_text(bool carried, bool degenerate) {
  std::string out;
  if (carried) out = "carried";
  if (degenerate) {
    if (!out.empty()) out += ';';
    out += "degenerate_track";
  }
  return out;
}

// ---------------- per-scene pipeline ----------------

struct ScenePipeline {
  SceneBundle bundle;
  TrackedBoxes boxes;
  DistanceTrace trace;
};

ScenePipeline run_pipeline(const std::string& scene_dir, const TrackerFlags& tracker,
                           const DistanceConfig& dcfg) {
  ScenePipeline p;
  p.bundle = load_scene(scene_dir);
  p.boxes = track_scene(p.bundle, tracker.tracker, tracker.radius);
  p.trace = estimate_distance_trace(p.bundle.scene, p.boxes.boxes, dcfg);
  return p;
}

std::string predictions_csv(const Scene& scene, const ScenePipeline& p,
                            const std::vector<double>& predictions) {
  std::ostringstream csv;
  csv << "idx,truth,prediction,distance_estimate,flags\n";
  for (size_t t = 0; t < predictions.size(); ++t) {
    csv << scene.frames[t].idx << ',';
    if (scene.frames[t].lead_velocity_mps) {
      csv << format_double(*scene.frames[t].lead_velocity_mps);
    }
    csv << ',' << format_double(predictions[t]) << ',' << format_double(p.trace.distance_m[t])
        << ',' << flags_text(p.trace.carried_forward[t] != 0, p.boxes.degenerate[t] != 0)
        << '\n';
  }
  return csv.str();
}

// Accepts the track subcommand's CSV (idx,x,y,w,h,...) as a box source.
std::vector<BoundingBox> boxes_from_csv(const fs::path& path, size_t expected) {
  std::istringstream lines(read_text_file(path));
  std::string line;
  std::getline(lines, line);  // header
  std::vector<BoundingBox> boxes;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    BoundingBox box;
    int idx = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%d", &idx, &box.x, &box.y, &box.w, &box.h) != 5) {
      raise(ErrorKind::config_invalid, path.string() + ": expected idx,x,y,w,h rows");
    }
    boxes.push_back(box);
  }
  if (boxes.size() != expected) {
    raise(ErrorKind::length_mismatch,
          path.string() + " holds " + std::to_string(boxes.size()) + " boxes for " +
              std::to_string(expected) + " frames");
  }
  return boxes;
}

// ---------------- subcommands ----------------

int cmd_generate(const std::string& config_path, const std::string& out_dir, int scenes,
                 std::uint64_t seed, bool seed_given) {
  ScenarioConfig base;
  if (!config_path.empty()) {
    base = parse_scenario_config(read_text_file(config_path));
  }
  if (seed_given) base.rng_seed = seed;

  for (int i = 0; i < scenes; ++i) {
    ScenarioConfig cfg = base;
    cfg.rng_seed = base.rng_seed + static_cast<std::uint64_t>(i);
    if (scenes > 1) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_%04d", i);
      cfg.scene_id = base.scene_id + suffix;
    }
    const GeneratedScene generated = generate_scene(cfg);
    const fs::path dir = fs::path(out_dir) / cfg.scene_id;
    save_scene(generated.bundle, dir);
    std::cout << dir.string() << "\n";
  }
  return 0;
}

int cmd_track(const std::string& scene_dir, const TrackerFlags& tracker,
              const std::string& out_path) {
  const SceneBundle bundle = load_scene(scene_dir);
  const TrackedBoxes tracked = track_scene(bundle, tracker.tracker, tracker.radius);
  std::ostringstream csv;
  csv << "idx,x,y,w,h,score,degenerate\n";
  for (size_t i = 0; i < tracked.boxes.size(); ++i) {
    const BoundingBox& b = tracked.boxes[i];
    csv << bundle.scene.frames[i].idx << ',' << b.x << ',' << b.y << ',' << b.w << ',' << b.h
        << ',' << format_double(tracked.scores[i]) << ','
        << (tracked.degenerate[i] ? 1 : 0) << '\n';
  }
  emit(csv.str(), out_path);
  return 0;
}

int cmd_distance(const std::string& scene_dir, const TrackerFlags& tracker,
                 const DistanceFlags& distance, const std::string& boxes_path,
                 const std::string& out_path) {
  const DistanceConfig dcfg = distance.to_config();
  SceneBundle bundle = load_scene(scene_dir);
  std::vector<BoundingBox> boxes;
  std::vector<char> degenerate(bundle.scene.frames.size(), 0);
  if (!boxes_path.empty()) {
    boxes = boxes_from_csv(boxes_path, bundle.scene.frames.size());
  } else {
    TrackedBoxes tracked = track_scene(bundle, tracker.tracker, tracker.radius);
    boxes = std::move(tracked.boxes);
    degenerate = std::move(tracked.degenerate);
  }
  const DistanceTrace trace = estimate_distance_trace(bundle.scene, boxes, dcfg);
  std::ostringstream csv;
  csv << "idx,distance_m,carried\n";
  for (size_t i = 0; i < trace.distance_m.size(); ++i) {
    csv << bundle.scene.frames[i].idx << ',' << format_double(trace.distance_m[i]) << ','
        << (trace.carried_forward[i] ? 1 : 0) << '\n';
  }
  emit(csv.str(), out_path);
  return 0;
}

int cmd_train(const std::string& model_name, const std::vector<std::string>& train_dirs,
              const TrackerFlags& tracker, const DistanceFlags& distance,
              const GbdtParams& gbdt, int lags, const std::string& out_path) {
  const DistanceConfig dcfg = distance.to_config();
  TrainingData data;
  for (const std::string& dir : train_dirs) {
    const ScenePipeline p = run_pipeline(dir, tracker, dcfg);
    append_training_rows(data, p.bundle.scene, p.trace, p.bundle.scene.fps, lags);
  }
  AnyModel model;
  if (model_name == "gbdt") {
    model = train_gbdt(data.rows, data.targets, gbdt);
    const GbdtModel& m = std::get<GbdtModel>(model);
    std::cout << "trained gbdt on " << data.rows.size() << " rows: " << m.trees.size()
              << " trees, base_score " << format_double(m.base_score)
              << (m.degenerate ? " (degenerate)" : "") << "\n";
  } else if (model_name == "linear") {
    model = train_linear(data.rows, data.targets);
    std::cout << "trained linear on " << data.rows.size() << " rows\n";
  } else {
    raise(ErrorKind::config_invalid, "train supports gbdt|linear, got \"" + model_name + "\"");
  }
  save_model(model, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& scene_dir, const std::string& model_name,
                const std::string& model_file, const TrackerFlags& tracker,
                const DistanceFlags& distance, int lags, const std::string& out_path) {
  const DistanceConfig dcfg = distance.to_config();
  const ScenePipeline p = run_pipeline(scene_dir, tracker, dcfg);

  std::vector<double> predictions;
  if (!model_file.empty()) {
    const AnyModel model = load_model(model_file);
    const ModelKind kind =
        std::holds_alternative<GbdtModel>(model) ? ModelKind::gbdt : ModelKind::linear;
    predictions = predict_from_trace(p.bundle.scene, p.trace, kind, &model, lags);
  } else if (model_name == "relvel") {
    predictions = predict_from_trace(p.bundle.scene, p.trace, ModelKind::relvel, nullptr, lags);
  } else {
    raise(ErrorKind::config_invalid, "predict needs --model-file or --model relvel");
  }
  emit(predictions_csv(p.bundle.scene, p, predictions), out_path);
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& scene_dirs, const std::string& model_name,
                 const std::string& model_file, const TrackerFlags& tracker,
                 const DistanceFlags& distance, int lags, const std::string& out_dir) {
  if (scene_dirs.empty()) {
    raise(ErrorKind::empty_input, "evaluate needs at least one --scene directory");
  }
  const DistanceConfig dcfg = distance.to_config();

  AnyModel model;
  ModelKind kind = ModelKind::relvel;
  if (!model_file.empty()) {
    model = load_model(model_file);
    kind = std::holds_alternative<GbdtModel>(model) ? ModelKind::gbdt : ModelKind::linear;
  } else if (model_name != "relvel") {
    raise(ErrorKind::config_invalid, "evaluate needs --model-file for " + model_name);
  }

  PooledError pooled;
  for (const std::string& dir : scene_dirs) {
    const ScenePipeline p = run_pipeline(dir, tracker, dcfg);
    const Scene& scene = p.bundle.scene;
    const auto predictions = predict_from_trace(
        scene, p.trace, kind, kind == ModelKind::relvel ? nullptr : &model, lags);
    PooledError scene_error;
    for (size_t t = 0; t < predictions.size(); ++t) {
      if (!scene.frames[t].lead_velocity_mps) {
        raise(ErrorKind::missing_ground_truth,
              "scene " + scene.scene_id + " frame " + std::to_string(t) +
                  " has no lead_velocity_mps to score against");
      }
      scene_error.add(predictions[t], *scene.frames[t].lead_velocity_mps);
    }
    pooled.merge(scene_error);
    std::cout << "scene " << scene.scene_id << ": rmse "
              << format_double(scene_error.rmse()) << " over " << scene_error.count
              << " frames\n";
    if (!out_dir.empty()) {
      write_text_file(fs::path(out_dir) / (scene.scene_id + "_predictions.csv"),
                      predictions_csv(scene, p, predictions));
    }
  }
  std::cout << "pooled rmse " << format_double(pooled.rmse()) << " over " << pooled.count
            << " frames\n";
  return 0;
}

int cmd_ablate(const std::string& spec_path, const std::string& out_dir) {
  const AblationSpec spec = ablation_spec_from_json(read_text_file(spec_path));
  const AblationReport report = run_ablation(spec);
  std::cout << report_table(report);
  write_text_file(fs::path(out_dir) / "report.csv", report_csv(report));
  std::cout << "wrote " << (fs::path(out_dir) / "report.csv").string() << "\n";

  std::ostringstream per_scene;
  per_scene << "tracker,estimator,model,scene_id,rmse,frames\n";
  for (const AblationRow& row : report.rows) {
    for (const SceneScore& s : row.per_scene) {
      per_scene << row.combo.tracker << ',' << to_string(row.combo.estimator) << ','
                << to_string(row.combo.model) << ',' << s.scene_id << ','
                << format_double(s.rmse) << ',' << s.frames << '\n';
    }
  }
  write_text_file(fs::path(out_dir) / "per_scene.csv", per_scene.str());
  std::cout << "wrote " << (fs::path(out_dir) / "per_scene.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lead-vehicle velocity estimation from stereo disparity scenes"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "Render synthetic scenes with ground truth");
  std::string gen_config, gen_out = ".";
  int gen_scenes = 1;
  std::uint64_t gen_seed = 0;
  generate->add_option("--config", gen_config, "Scenario key=value file")
      ->check(CLI::ExistingFile);
  generate->add_option("--out", gen_out, "Output parent directory")->required();
  auto* gen_scenes_opt =
      generate->add_option("--scenes", gen_scenes, "Number of scenes (seeds S..S+N-1)")
          ->check(CLI::PositiveNumber);
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Base RNG seed");
  (void)gen_scenes_opt;

  // track
  auto* track = app.add_subcommand("track", "Produce one lead box per frame");
  std::string track_scene_dir, track_out;
  TrackerFlags track_flags;
  track_flags.tracker = "ncc";
  track->add_option("--scene", track_scene_dir, "Scene directory")->required();
  add_tracker_flags(track, track_flags);
  track->add_option("--out", track_out, "Boxes CSV path (default: stdout)");
  track->set_config("--config-file");

  // distance
  auto* distance = app.add_subcommand("distance", "Estimate per-frame lead distance");
  std::string dist_scene_dir, dist_boxes, dist_out;
  TrackerFlags dist_tracker;
  DistanceFlags dist_flags;
  distance->add_option("--scene", dist_scene_dir, "Scene directory")->required();
  add_tracker_flags(distance, dist_tracker);
  add_distance_flags(distance, dist_flags);
  distance->add_option("--boxes", dist_boxes, "Boxes CSV from the track subcommand")
      ->check(CLI::ExistingFile);
  distance->add_option("--out", dist_out, "Trace CSV path (default: stdout)");
  distance->set_config("--config-file");

  // train
  auto* train = app.add_subcommand("train", "Fit a velocity regression model");
  std::string train_model = "gbdt", train_out = "model.json";
  std::vector<std::string> train_dirs;
  TrackerFlags train_tracker;
  DistanceFlags train_distance;
  GbdtFlags train_gbdt_flags;
  int train_lags = kDefaultLagCount;
  train->add_option("--model", train_model, "gbdt|linear")
      ->check(CLI::IsMember({"gbdt", "linear"}));
  train->add_option("--train-dir", train_dirs, "Training scene directories")
      ->required()
      ->expected(-1);
  train->add_option("--out", train_out, "Model JSON output path");
  add_tracker_flags(train, train_tracker);
  add_distance_flags(train, train_distance);
  train_gbdt_flags.add_to(train);
  train->add_option("--lags", train_lags, "Lag feature count")->check(CLI::PositiveNumber);
  train->set_config("--config-file");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict lead velocity for one scene");
  std::string pred_scene_dir, pred_model = "relvel", pred_model_file, pred_out;
  TrackerFlags pred_tracker;
  DistanceFlags pred_distance;
  int pred_lags = kDefaultLagCount;
  predict->add_option("--scene", pred_scene_dir, "Scene directory")->required();
  predict->add_option("--model", pred_model, "relvel (trained models come from --model-file)");
  predict->add_option("--model-file", pred_model_file, "Trained model JSON")
      ->check(CLI::ExistingFile);
  add_tracker_flags(predict, pred_tracker);
  add_distance_flags(predict, pred_distance);
  predict->add_option("--lags", pred_lags, "Lag feature count")->check(CLI::PositiveNumber);
  predict->add_option("--out", pred_out, "Predictions CSV path (default: stdout)");
  predict->set_config("--config-file");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score scenes against ground truth");
  std::vector<std::string> eval_dirs;
  std::string eval_model = "relvel", eval_model_file, eval_out_dir;
  TrackerFlags eval_tracker;
  DistanceFlags eval_distance;
  int eval_lags = kDefaultLagCount;
  evaluate->add_option("--scene", eval_dirs, "Scene directories")->required()->expected(-1);
  evaluate->add_option("--model", eval_model, "relvel (trained models come from --model-file)");
  evaluate->add_option("--model-file", eval_model_file, "Trained model JSON")
      ->check(CLI::ExistingFile);
  add_tracker_flags(evaluate, eval_tracker);
  add_distance_flags(evaluate, eval_distance);
  evaluate->add_option("--lags", eval_lags, "Lag feature count")->check(CLI::PositiveNumber);
  evaluate->add_option("--out-dir", eval_out_dir, "Write per-scene predictions.csv here");
  evaluate->set_config("--config-file");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run a combination matrix and report RMSE");
  std::string ablate_spec, ablate_out = ".";
  ablate->add_option("--spec", ablate_spec, "Ablation spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  ablate->add_option("--out-dir", ablate_out, "Report output directory");
  ablate->set_config("--config-file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's exit-code zoo: 0 for --help and friends, 1 for any
    // genuine usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) {
      return cmd_generate(gen_config, gen_out, gen_scenes, gen_seed,
                          gen_seed_opt->count() > 0);
    }
    if (track->parsed()) {
      return cmd_track(track_scene_dir, track_flags, track_out);
    }
    if (distance->parsed()) {
      return cmd_distance(dist_scene_dir, dist_tracker, dist_flags, dist_boxes, dist_out);
    }
    if (train->parsed()) {
      return cmd_train(train_model, train_dirs, train_tracker, train_distance,
                       train_gbdt_flags.params, train_lags, train_out);
    }
    if (predict->parsed()) {
      return cmd_predict(pred_scene_dir, pred_model, pred_model_file, pred_tracker,
                         pred_distance, pred_lags, pred_out);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_dirs, eval_model, eval_model_file, eval_tracker, eval_distance,
                          eval_lags, eval_out_dir);
    }
    if (ablate->parsed()) {
      return cmd_ablate(ablate_spec, ablate_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

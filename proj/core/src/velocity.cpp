#include "leadvel/velocity.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leadvel/errors.hpp"

namespace leadvel {

double relative_velocity(double d_prev_m, double d_curr_m, double dt_s, double v_ego_mps) {
  if (!(dt_s > 0.0)) {
    raise(ErrorKind::non_positive_dt, "dt_s must be > 0, got " + std::to_string(dt_s));
  }
  return v_ego_mps + (d_curr_m - d_prev_m) / dt_s;
}

VelocityTrace make_velocity_trace(const Scene& scene, const DistanceTrace& distances) {
  if (distances.distance_m.size() != scene.frames.size()) {
    raise(ErrorKind::length_mismatch, "distance trace length does not match frame count");
  }
  VelocityTrace trace;
  const size_t n = scene.frames.size();
  trace.distance_m = distances.distance_m;
  trace.ego_velocity_mps.reserve(n);
  trace.steering_angle_deg.reserve(n);
  trace.rel_velocity_mps.reserve(n);
  for (const FrameRecord& frame : scene.frames) {
    trace.ego_velocity_mps.push_back(frame.ego_velocity_mps);
    trace.steering_angle_deg.push_back(frame.steering_angle_deg);
  }
  const double dt = 1.0 / scene.fps;
  trace.rel_velocity_mps.push_back(std::nullopt);
  for (size_t t = 1; t < n; ++t) {
    trace.rel_velocity_mps.push_back(relative_velocity(
        trace.distance_m[t - 1], trace.distance_m[t], dt, trace.ego_velocity_mps[t]));
  }
  return trace;
}

std::vector<double> build_features(const VelocityTrace& trace, int t, double fps, int lags) {
  if (t < 0 || static_cast<size_t>(t) >= trace.size()) {
    raise(ErrorKind::index_out_of_range,
          "frame " + std::to_string(t) + " of " + std::to_string(trace.size()));
  }
  if (lags < 1) {
    raise(ErrorKind::config_invalid, "lags must be >= 1");
  }
  const double dt = 1.0 / fps;

  std::vector<double> features;
  features.reserve(static_cast<size_t>(lags) + 3);
  const double imputed = trace.ego_velocity_mps[static_cast<size_t>(t)];
  for (int lag = 0; lag < lags; ++lag) {
    const int k = t - lag;
    if (k >= 1) {
      features.push_back(relative_velocity(trace.distance_m[static_cast<size_t>(k - 1)],
                                           trace.distance_m[static_cast<size_t>(k)], dt,
                                           trace.ego_velocity_mps[static_cast<size_t>(k)]));
    } else {
      features.push_back(imputed);
    }
  }
  features.push_back(trace.ego_velocity_mps[static_cast<size_t>(t)]);
  features.push_back(trace.steering_angle_deg[static_cast<size_t>(t)]);
  features.push_back(trace.distance_m[static_cast<size_t>(t)]);
  return features;
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "relvel") return ModelKind::relvel;
  if (name == "linear") return ModelKind::linear;
  if (name == "gbdt") return ModelKind::gbdt;
  raise(ErrorKind::config_invalid, "unknown model \"" + name + "\" (want relvel|linear|gbdt)");
}

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::relvel: return "relvel";
    case ModelKind::linear: return "linear";
    case ModelKind::gbdt: return "gbdt";
  }
  return "?";
}

namespace {

using json = nlohmann::ordered_json;

std::string linear_to_json(const LinearModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["model_type"] = "linear";
  doc["coefficients"] = model.coefficients;
  doc["intercept"] = model.intercept;
  return doc.dump(2) + "\n";
}

}  // namespace

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  const std::string text = std::holds_alternative<GbdtModel>(model)
                               ? gbdt_to_json(std::get<GbdtModel>(model))
                               : linear_to_json(std::get<LinearModel>(model));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    raise(ErrorKind::io_failure, "while writing " + path.string());
  }
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorKind::missing_file, path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::malformed_json, path.string() + ": " + e.what());
  }
  const std::string type = doc.value("model_type", "");
  if (type == "gbdt") {
    return gbdt_from_json(text);
  }
  if (type == "linear") {
    LinearModel model;
    model.coefficients = doc.at("coefficients").get<std::vector<double>>();
    model.intercept = doc.at("intercept").get<double>();
    return model;
  }
  raise(ErrorKind::malformed_json, path.string() + ": unknown model_type \"" + type + "\"");
}

double predict_any(const AnyModel& model, std::span<const double> features) {
  if (std::holds_alternative<GbdtModel>(model)) {
    return predict_gbdt(std::get<GbdtModel>(model), features);
  }
  return predict_linear(std::get<LinearModel>(model), features);
}

void append_training_rows(TrainingData& data, const Scene& scene,
                          const DistanceTrace& distances, double fps, int lags) {
  const VelocityTrace trace = make_velocity_trace(scene, distances);
  for (size_t t = 0; t < trace.size(); ++t) {
    const auto& truth = scene.frames[t].lead_velocity_mps;
    if (!truth) {
      raise(ErrorKind::missing_ground_truth,
            "scene " + scene.scene_id + " frame " + std::to_string(t) +
                " has no lead_velocity_mps for training");
    }
    data.rows.push_back(build_features(trace, static_cast<int>(t), fps, lags));
    data.targets.push_back(*truth);
  }
}

std::vector<double> predict_from_trace(const Scene& scene, const DistanceTrace& distances,
                                       ModelKind kind, const AnyModel* model, int lags) {
  if (kind != ModelKind::relvel && model == nullptr) {
    raise(ErrorKind::config_invalid,
          std::string(to_string(kind)) + " prediction needs a trained model");
  }
  const VelocityTrace trace = make_velocity_trace(scene, distances);

  std::vector<double> predictions;
  predictions.reserve(trace.size());
  for (size_t t = 0; t < trace.size(); ++t) {
    if (kind == ModelKind::relvel) {
      // Frame 0 has no previous distance; ego velocity is the bootstrap prior.
      predictions.push_back(t == 0 ? trace.ego_velocity_mps[0]
                                   : *trace.rel_velocity_mps[t]);
    } else {
      const auto features = build_features(trace, static_cast<int>(t), scene.fps, lags);
      predictions.push_back(predict_any(*model, features));
    }
  }
  return predictions;
}

std::vector<double> predict_scene(const Scene& scene, const std::vector<BoundingBox>& boxes,
                                  const DistanceConfig& distance_cfg, ModelKind kind,
                                  const AnyModel* model, int lags) {
  const DistanceTrace distances = estimate_distance_trace(scene, boxes, distance_cfg);
  return predict_from_trace(scene, distances, kind, model, lags);
}

}  // namespace leadvel

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "leadvel/distance.hpp"
#include "leadvel/gbdt.hpp"
#include "leadvel/linear.hpp"
#include "leadvel/types.hpp"

namespace leadvel {

// Per-frame quantities feeding the regression stage. rel_velocity is the
// lead-velocity estimate from gap arithmetic; it is undefined (not 0) on
// frame 0 because there is no previous distance.
struct VelocityTrace {
  std::vector<double> distance_m;
  std::vector<double> ego_velocity_mps;
  std::vector<double> steering_angle_deg;
  std::vector<std::optional<double>> rel_velocity_mps;
  std::vector<double> predicted_lead_velocity_mps;

  size_t size() const { return distance_m.size(); }
};

// v_ego + (d_curr - d_prev) / dt: a growing gap means the lead is faster.
double relative_velocity(double d_prev_m, double d_curr_m, double dt_s, double v_ego_mps);

VelocityTrace make_velocity_trace(const Scene& scene, const DistanceTrace& distances);

inline constexpr int kDefaultLagCount = 18;

// Feature layout (lags + 3 entries): lead-velocity estimates c(t), c(t-1),
// ..., c(t-lags+1) with v_ego(t) imputed where the lag reaches before frame
// 1, then ego velocity, steering angle, and distance at t.
std::vector<double> build_features(const VelocityTrace& trace, int t, double fps,
                                   int lags = kDefaultLagCount);

enum class ModelKind { relvel, linear, gbdt };

ModelKind model_kind_from_name(const std::string& name);
const char* to_string(ModelKind kind) noexcept;

using AnyModel = std::variant<LinearModel, GbdtModel>;

// Versioned JSON documents with exact float round-trip; the model_type key
// tags which model is stored.
void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);
double predict_any(const AnyModel& model, std::span<const double> features);

struct TrainingData {
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
};

// Appends one (features, true lead velocity) row per frame of the scene.
// Frames need lead_velocity_mps ground truth.
void append_training_rows(TrainingData& data, const Scene& scene,
                          const DistanceTrace& distances, double fps,
                          int lags = kDefaultLagCount);

// One lead-velocity estimate per frame from an existing distance trace.
// relvel needs no trained model and bootstraps frame 0 with v_ego(0);
// gbdt/linear regress on the lag features.
std::vector<double> predict_from_trace(const Scene& scene, const DistanceTrace& distances,
                                       ModelKind kind, const AnyModel* model = nullptr,
                                       int lags = kDefaultLagCount);

// Full per-scene prediction: runs the distance stage, then predict_from_trace.
std::vector<double> predict_scene(const Scene& scene, const std::vector<BoundingBox>& boxes,
                                  const DistanceConfig& distance_cfg, ModelKind kind,
                                  const AnyModel* model = nullptr,
                                  int lags = kDefaultLagCount);

}  // namespace leadvel

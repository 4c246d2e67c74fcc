#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leadvel/dataset_io.hpp"
#include "leadvel/types.hpp"

namespace leadvel {

// Closed-form 1-D speed profiles for the two vehicles.
struct VelocityProfile {
  enum class Kind { constant, sinusoid, braking };

  Kind kind = Kind::constant;
  double v0_mps = 15.0;
  // sinusoid: v0 + amplitude * sin(2 pi t / period)
  double amplitude_mps = 0.0;
  double period_s = 5.0;
  // braking: max(v0 - decel * t, floor)
  double decel_mps2 = 0.0;
  double floor_mps = 0.0;
};

double velocity_profile(const VelocityProfile& profile, double t_s);

struct ScenarioConfig {
  std::string scene_id = "synthetic";
  int n_frames = 100;
  double fps = 10.0;
  CameraRig rig{0.35, 1400.0};
  int image_width = 640;
  int image_height = 400;
  VelocityProfile lead;
  VelocityProfile ego;
  double initial_gap_m = 20.0;
  double noise_sigma_px = 0.0;
  // Fraction of box rows (from the top) that see background depth instead of
  // the vehicle, mimicking boxes that overshoot the vehicle outline.
  double contamination_fraction = 0.0;
  double background_distance_m = 120.0;
  double lead_width_m = 1.8;
  std::uint64_t rng_seed = 0;
};

struct GroundTruthTable {
  std::vector<double> lead_velocity_mps;
  std::vector<double> lead_distance_m;
  // Frames where the integrated gap hit the 1 m floor.
  std::vector<char> collided;
};

struct GeneratedScene {
  SceneBundle bundle;
  GroundTruthTable truth;
};

// Deterministic given cfg.rng_seed. The gap integrates
// (v_lead - v_ego) / fps frame to frame (explicit Euler, floor 1 m); the box
// follows the pinhole model with its vertical center pinned to a horizon
// line; in-box disparity is offset*focal/gap except the contaminated top
// rows, which carry background depth; everything gets Gaussian pixel noise
// and is quantized to Q8.8 so in-memory scenes match their on-disk form
// exactly.
//
// Draw order (one xoshiro256++ stream seeded by rng_seed): 64x64 texture
// pattern row-major, then per frame one steering draw in [-2, 2] degrees
// followed by one Gaussian per pixel, row-major, when noise_sigma_px > 0.
GeneratedScene generate_scene(const ScenarioConfig& cfg);

// Key-value scenario text: one "key = value" per line, '#' comments.
// Profile values are "constant <v0>", "sinusoid <v0> <amplitude> <period>",
// or "braking <v0> <decel> <floor>".
ScenarioConfig parse_scenario_config(const std::string& text);

// Contamination stress benchmark: `scenes` scenarios with profile families,
// speeds, and gaps varied by a meta generator seeded with `seed`; scene i
// itself renders with rng_seed = seed + i.
std::vector<ScenarioConfig> contamination_benchmark(std::uint64_t seed, int scenes,
                                                    double contamination_fraction,
                                                    double noise_sigma_px);

}  // namespace leadvel

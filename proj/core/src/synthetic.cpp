#include "leadvel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "leadvel/errors.hpp"
#include "leadvel/rng.hpp"

namespace leadvel {

namespace {

// Coarse texture cells survive the pinhole rescaling well enough for
// template matching; per-pixel noise would decorrelate at the first resample.
constexpr int kPatternSize = 16;
constexpr std::uint8_t kBackgroundIntensity = 96;
constexpr double kMinGapM = 1.0;
constexpr double kHorizonFraction = 0.45;

double quantize_q88(double disparity_px) {
  const double clamped = std::clamp(disparity_px, 0.01, 255.99);
  return std::round(clamped * 256.0) / 256.0;
}

void validate_profile(const VelocityProfile& p, const std::string& name) {
  auto fail = [&name](const std::string& why) {
    raise(ErrorKind::config_invalid, name + " profile: " + why);
  };
  if (!(p.v0_mps >= 0.0) || !std::isfinite(p.v0_mps)) fail("v0 must be >= 0");
  switch (p.kind) {
    case VelocityProfile::Kind::constant:
      break;
    case VelocityProfile::Kind::sinusoid:
      if (!(p.amplitude_mps >= 0.0)) fail("amplitude must be >= 0");
      if (!(p.period_s > 0.0)) fail("period must be > 0");
      if (p.v0_mps - p.amplitude_mps < 0.0) fail("speed dips below 0 (v0 < amplitude)");
      break;
    case VelocityProfile::Kind::braking:
      if (!(p.decel_mps2 >= 0.0)) fail("decel must be >= 0");
      if (!(p.floor_mps >= 0.0)) fail("floor must be >= 0");
      break;
  }
}

void validate_config(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& why) { raise(ErrorKind::config_invalid, why); };
  if (cfg.n_frames < 1) fail("n_frames must be >= 1");
  if (!(cfg.fps > 0.0)) fail("fps must be > 0");
  if (!(cfg.rig.offset_m > 0.0) || !(cfg.rig.focal_length_px > 0.0)) {
    fail("camera rig values must be > 0");
  }
  if (cfg.image_width < 8 || cfg.image_height < 8) fail("image must be at least 8x8");
  if (!(cfg.initial_gap_m > 0.0)) fail("initial_gap_m must be > 0");
  if (!(cfg.noise_sigma_px >= 0.0)) fail("noise_sigma_px must be >= 0");
  if (!(cfg.contamination_fraction >= 0.0 && cfg.contamination_fraction < 1.0)) {
    fail("contamination_fraction must be in [0, 1)");
  }
  if (!(cfg.background_distance_m > 0.0)) fail("background_distance_m must be > 0");
  if (!(cfg.lead_width_m > 0.0)) fail("lead_width_m must be > 0");
  validate_profile(cfg.lead, "lead");
  validate_profile(cfg.ego, "ego");
}

BoundingBox project_box(const ScenarioConfig& cfg, double gap_m) {
  const double width_px = cfg.lead_width_m * cfg.rig.focal_length_px / gap_m;
  int w = static_cast<int>(std::lround(width_px));
  w = std::clamp(w, 1, cfg.image_width);
  int h = static_cast<int>(std::lround(0.8 * static_cast<double>(w)));
  h = std::clamp(h, 1, cfg.image_height);

  const int horizon = static_cast<int>(std::lround(kHorizonFraction * cfg.image_height));
  int x = (cfg.image_width - w) / 2;
  int y = horizon - h / 2;
  x = std::clamp(x, 0, cfg.image_width - w);
  y = std::clamp(y, 0, cfg.image_height - h);
  return BoundingBox{x, y, w, h};
}

}  // namespace

double velocity_profile(const VelocityProfile& profile, double t_s) {
  switch (profile.kind) {
    case VelocityProfile::Kind::constant:
      return profile.v0_mps;
    case VelocityProfile::Kind::sinusoid:
      return profile.v0_mps +
             profile.amplitude_mps * std::sin(2.0 * std::numbers::pi * t_s / profile.period_s);
    case VelocityProfile::Kind::braking:
      return std::max(profile.v0_mps - profile.decel_mps2 * t_s, profile.floor_mps);
  }
  return profile.v0_mps;
}

GeneratedScene generate_scene(const ScenarioConfig& cfg) {
  validate_config(cfg);

  Rng rng(cfg.rng_seed);

  // Scene-level vehicle texture, sampled in vehicle-local coordinates so the
  // appearance stays put as the box moves and rescales. 16x16 draws, row-major.
  std::vector<std::uint8_t> pattern(kPatternSize * kPatternSize);
  for (auto& p : pattern) {
    p = static_cast<std::uint8_t>(rng.index_below(256));
  }

  GeneratedScene out;
  Scene& scene = out.bundle.scene;
  scene.scene_id = cfg.scene_id;
  scene.fps = cfg.fps;
  scene.rig = cfg.rig;

  const double dt = 1.0 / cfg.fps;
  const double background_disparity =
      cfg.rig.offset_m * cfg.rig.focal_length_px / cfg.background_distance_m;

  double gap = cfg.initial_gap_m;
  for (int i = 0; i < cfg.n_frames; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double v_lead = velocity_profile(cfg.lead, t);
    const double v_ego = velocity_profile(cfg.ego, t);

    if (i > 0) {
      const double t_prev = static_cast<double>(i - 1) * dt;
      gap += (velocity_profile(cfg.lead, t_prev) - velocity_profile(cfg.ego, t_prev)) * dt;
    }
    bool collided = false;
    if (gap < kMinGapM) {
      gap = kMinGapM;
      collided = true;
    }

    const BoundingBox box = project_box(cfg, gap);
    const double vehicle_disparity = cfg.rig.offset_m * cfg.rig.focal_length_px / gap;
    int contaminated_rows =
        static_cast<int>(std::lround(cfg.contamination_fraction * static_cast<double>(box.h)));
    contaminated_rows = std::min(contaminated_rows, box.h - 1);

    FrameRecord frame;
    frame.idx = i;
    frame.ego_velocity_mps = v_ego;
    frame.steering_angle_deg = rng.uniform(-2.0, 2.0);
    frame.lead_bbox = box;
    frame.lead_velocity_mps = v_lead;
    frame.lead_distance_m = gap;

    DisparityMap& dmap = frame.disparity;
    dmap.width = cfg.image_width;
    dmap.height = cfg.image_height;
    dmap.values.resize(static_cast<size_t>(cfg.image_width) * cfg.image_height);
    for (int py = 0; py < cfg.image_height; ++py) {
      const bool vehicle_row = py >= box.y + contaminated_rows && py < box.y + box.h;
      for (int px = 0; px < cfg.image_width; ++px) {
        const bool vehicle = vehicle_row && px >= box.x && px < box.x + box.w;
        double d = vehicle ? vehicle_disparity : background_disparity;
        if (cfg.noise_sigma_px > 0.0) {
          d += cfg.noise_sigma_px * rng.gaussian();
        }
        dmap.values[static_cast<size_t>(py) * cfg.image_width + px] =
            static_cast<float>(quantize_q88(d));
      }
    }

    GrayImage image;
    image.width = cfg.image_width;
    image.height = cfg.image_height;
    image.values.assign(static_cast<size_t>(cfg.image_width) * cfg.image_height,
                        kBackgroundIntensity);
    for (int py = box.y; py < box.y + box.h; ++py) {
      const int v = (py - box.y) * kPatternSize / box.h;
      for (int px = box.x; px < box.x + box.w; ++px) {
        const int u = (px - box.x) * kPatternSize / box.w;
        image.values[static_cast<size_t>(py) * cfg.image_width + px] =
            pattern[static_cast<size_t>(v) * kPatternSize + u];
      }
    }

    scene.frames.push_back(std::move(frame));
    out.bundle.images.push_back(std::move(image));
    out.truth.lead_velocity_mps.push_back(v_lead);
    out.truth.lead_distance_m.push_back(gap);
    out.truth.collided.push_back(collided ? 1 : 0);
  }
  return out;
}

namespace {

VelocityProfile parse_profile(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  std::string kind;
  in >> kind;
  VelocityProfile profile;
  if (kind == "constant") {
    profile.kind = VelocityProfile::Kind::constant;
    in >> profile.v0_mps;
  } else if (kind == "sinusoid") {
    profile.kind = VelocityProfile::Kind::sinusoid;
    in >> profile.v0_mps >> profile.amplitude_mps >> profile.period_s;
  } else if (kind == "braking") {
    profile.kind = VelocityProfile::Kind::braking;
    in >> profile.v0_mps >> profile.decel_mps2 >> profile.floor_mps;
  } else {
    raise(ErrorKind::config_invalid,
          key + ": unknown profile \"" + kind + "\" (want constant|sinusoid|braking)");
  }
  if (in.fail()) {
    raise(ErrorKind::config_invalid, key + ": not enough numeric arguments for " + kind);
  }
  return profile;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto from = s.find_first_not_of(" \t\r");
      if (from == std::string::npos) return std::string();
      const auto to = s.find_last_not_of(" \t\r");
      return s.substr(from, to - from + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty()) {
        raise(ErrorKind::config_invalid,
              "line " + std::to_string(line_no) + ": expected key = value");
      }
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(ErrorKind::config_invalid,
            "line " + std::to_string(line_no) + ": expected key = value");
    }

    auto as_double = [&](const std::string& v) {
      try {
        size_t used = 0;
        const double parsed = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return parsed;
      } catch (const std::exception&) {
        raise(ErrorKind::config_invalid,
              "line " + std::to_string(line_no) + ": \"" + v + "\" is not a number");
      }
    };

    if (key == "scene_id") cfg.scene_id = value;
    else if (key == "n_frames") cfg.n_frames = static_cast<int>(as_double(value));
    else if (key == "fps") cfg.fps = as_double(value);
    else if (key == "offset_m") cfg.rig.offset_m = as_double(value);
    else if (key == "focal_length_px") cfg.rig.focal_length_px = as_double(value);
    else if (key == "image_width") cfg.image_width = static_cast<int>(as_double(value));
    else if (key == "image_height") cfg.image_height = static_cast<int>(as_double(value));
    else if (key == "lead_profile") cfg.lead = parse_profile(value, key);
    else if (key == "ego_profile") cfg.ego = parse_profile(value, key);
    else if (key == "initial_gap_m") cfg.initial_gap_m = as_double(value);
    else if (key == "noise_sigma_px") cfg.noise_sigma_px = as_double(value);
    else if (key == "contamination_fraction") cfg.contamination_fraction = as_double(value);
    else if (key == "background_distance_m") cfg.background_distance_m = as_double(value);
    else if (key == "lead_width_m") cfg.lead_width_m = as_double(value);
    else if (key == "seed") cfg.rng_seed = static_cast<std::uint64_t>(as_double(value));
    else {
      raise(ErrorKind::config_invalid,
            "line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    }
  }
  return cfg;
}

std::vector<ScenarioConfig> contamination_benchmark(std::uint64_t seed, int scenes,
                                                    double contamination_fraction,
                                                    double noise_sigma_px) {
  Rng meta(seed);
  std::vector<ScenarioConfig> configs;
  configs.reserve(static_cast<size_t>(scenes));
  for (int i = 0; i < scenes; ++i) {
    ScenarioConfig cfg;
    cfg.scene_id = "bench_" + std::to_string(seed) + "_" + std::to_string(i);
    cfg.n_frames = 40;
    cfg.fps = 10.0;
    // A nearby background keeps its disparity well clear of the noise floor;
    // otherwise near-zero disparities map to absurd distances that swamp the
    // estimators' working range.
    cfg.rig = CameraRig{0.35, 450.0};
    cfg.image_width = 224;
    cfg.image_height = 144;
    cfg.noise_sigma_px = noise_sigma_px;
    cfg.contamination_fraction = contamination_fraction;
    cfg.background_distance_m = 40.0;
    cfg.lead_width_m = 1.8;
    cfg.rng_seed = seed + static_cast<std::uint64_t>(i);

    const double base_speed = meta.uniform(8.0, 22.0);
    const int lead_kind = static_cast<int>(meta.index_below(3));
    VelocityProfile lead;
    if (lead_kind == 0) {
      lead.kind = VelocityProfile::Kind::constant;
      lead.v0_mps = base_speed;
    } else if (lead_kind == 1) {
      lead.kind = VelocityProfile::Kind::sinusoid;
      lead.v0_mps = base_speed;
      lead.amplitude_mps = meta.uniform(0.5, 3.0);
      lead.period_s = meta.uniform(5.0, 12.0);
    } else {
      lead.kind = VelocityProfile::Kind::braking;
      lead.v0_mps = base_speed;
      lead.decel_mps2 = meta.uniform(0.3, 0.8);
      lead.floor_mps = std::max(2.0, base_speed - 2.5);
    }

    // Ego shadows the lead with a perturbed speed so the gap drifts but stays
    // plausible over the scene.
    VelocityProfile ego;
    ego.kind = VelocityProfile::Kind::constant;
    ego.v0_mps = std::max(0.0, base_speed + meta.uniform(-1.0, 1.0));

    cfg.lead = lead;
    cfg.ego = ego;
    cfg.initial_gap_m = meta.uniform(16.0, 28.0);
    configs.push_back(cfg);
  }
  return configs;
}

}  // namespace leadvel

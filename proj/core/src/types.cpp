#include "leadvel/types.hpp"

#include <cmath>
#include <string>

namespace leadvel {

namespace {

std::string frame_prefix(int idx) { return "frame " + std::to_string(idx) + ": "; }

}  // namespace

std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> violations;
  auto flag = [&violations](const std::string& msg) { violations.push_back(msg); };

  if (!(std::isfinite(scene.rig.offset_m) && scene.rig.offset_m > 0)) {
    flag("rig: offset_m must be finite and > 0");
  }
  if (!(std::isfinite(scene.rig.focal_length_px) && scene.rig.focal_length_px > 0)) {
    flag("rig: focal_length_px must be finite and > 0");
  }
  if (!(std::isfinite(scene.fps) && scene.fps > 0)) {
    flag("scene: fps must be finite and > 0");
  }
  if (scene.frames.empty()) {
    flag("scene: frames must be non-empty");
    return violations;
  }

  for (size_t i = 0; i < scene.frames.size(); ++i) {
    const FrameRecord& f = scene.frames[i];
    const std::string at = frame_prefix(static_cast<int>(i));

    if (f.idx != static_cast<int>(i)) {
      flag(at + "non-contiguous idx (got " + std::to_string(f.idx) + ")");
    }
    if (!(std::isfinite(f.ego_velocity_mps) && f.ego_velocity_mps >= 0)) {
      flag(at + "ego_velocity_mps must be finite and >= 0");
    }
    if (!std::isfinite(f.steering_angle_deg)) {
      flag(at + "steering_angle_deg must be finite");
    }

    const DisparityMap& d = f.disparity;
    if (d.width <= 0 || d.height <= 0) {
      flag(at + "disparity raster has non-positive dimensions");
    }
    if (d.values.size() != static_cast<size_t>(d.width) * static_cast<size_t>(d.height)) {
      flag(at + "disparity values length does not match width*height");
    } else {
      for (float v : d.values) {
        if (!(std::isfinite(v) && v >= 0.0f)) {
          flag(at + "disparity contains a negative or non-finite value");
          break;
        }
      }
    }

    if (f.lead_bbox && !f.lead_bbox->fits_within(d.width, d.height)) {
      flag(at + "lead_bbox out of raster bounds");
    }
    if (f.lead_distance_m && !(std::isfinite(*f.lead_distance_m) && *f.lead_distance_m > 0)) {
      flag(at + "lead_distance_m must be finite and > 0");
    }
    if (f.lead_velocity_mps && !std::isfinite(*f.lead_velocity_mps)) {
      flag(at + "lead_velocity_mps must be finite");
    }
  }

  if (!scene.frames.front().lead_bbox) {
    flag(frame_prefix(0) + "lead_bbox must be present on the first frame");
  }
  return violations;
}

}  // namespace leadvel

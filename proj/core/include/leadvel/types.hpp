#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leadvel {

// Units are canonical across the whole library: velocities in m/s, distances
// in meters, angles in degrees. Frame timestamps are idx / fps.

// Stereo geometry. distance = offset_m * focal_length_px / disparity_px.
struct CameraRig {
  double offset_m = 0.0;
  double focal_length_px = 0.0;

  friend bool operator==(const CameraRig&, const CameraRig&) = default;
};

// Axis-aligned pixel rectangle, origin at the image top-left.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool fits_within(int image_width, int image_height) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && x + w <= image_width && y + h <= image_height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Row-major disparity raster in pixels. 0 marks an invalid pixel (no stereo
// match); valid values are positive and finite. Values are Q8.8 quantized by
// the on-disk format, which float holds exactly.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int px, int py) const { return values[static_cast<size_t>(py) * width + px]; }

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;
};

// Row-major 8-bit grayscale raster, used by the tracking path only.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int px, int py) const {
    return values[static_cast<size_t>(py) * width + px];
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// One stereo frame: ego telemetry plus the disparity raster. Ground-truth
// fields are present on train-style data; test-style data carries lead_bbox
// on frame 0 only.
struct FrameRecord {
  int idx = 0;
  double ego_velocity_mps = 0.0;
  double steering_angle_deg = 0.0;
  DisparityMap disparity;
  std::optional<BoundingBox> lead_bbox;
  std::optional<double> lead_velocity_mps;
  std::optional<double> lead_distance_m;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct Scene {
  std::string scene_id;
  double fps = 0.0;
  CameraRig rig;
  std::vector<FrameRecord> frames;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Checks every type invariant and returns one human-readable description per
// violation (empty means valid). Violations are data, not faults: malformed
// scenes never throw here.
std::vector<std::string> validate_scene(const Scene& scene);

}  // namespace leadvel

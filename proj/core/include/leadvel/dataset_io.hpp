#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "leadvel/types.hpp"

namespace leadvel {

// A scene plus the per-frame grayscale tracking images that live beside it on
// disk (the Scene itself only carries what the distance path needs).
struct SceneBundle {
  Scene scene;
  std::vector<GrayImage> images;

  friend bool operator==(const SceneBundle&, const SceneBundle&) = default;
};

// Disparity rasters: binary P5 PGM, maxval 65535, big-endian 16-bit samples,
// fixed-point Q8.8 (disparity = raw / 256). Raw 0 is the invalid-pixel
// sentinel.
DisparityMap read_disparity_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_disparity_pgm(const DisparityMap& map);

// Tracking images: binary P5 PGM, maxval 255.
GrayImage read_gray_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_gray_pgm(const GrayImage& image);

// On-disk layout: <dir>/scene.json plus one disp_<idx:4>.pgm and one
// img_<idx:4>.pgm per frame. Annotation schema keys:
//   scene_id, fps, camera{offset_m, focal_length_px},
//   frames[{idx, ego_velocity_mps, steering_angle_deg, disparity_file,
//           image_file, lead_bbox [x,y,w,h]?, lead_velocity_mps?,
//           lead_distance_m?}]
SceneBundle load_scene(const std::filesystem::path& dir);
void save_scene(const SceneBundle& bundle, const std::filesystem::path& dir);

std::string disparity_file_name(int idx);
std::string image_file_name(int idx);

}  // namespace leadvel

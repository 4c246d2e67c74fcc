#pragma once

#include <memory>
#include <string>
#include <vector>

#include "leadvel/types.hpp"

namespace leadvel {

struct SceneBundle;

// Fixed-template tracker state. The template is the exact crop of the init
// box and is never updated afterwards.
struct TrackerState {
  GrayImage templ;
  BoundingBox last_box;
  int search_radius_px = 32;
  int frame_width = 0;
  int frame_height = 0;
};

struct TrackResult {
  BoundingBox box;
  // Zero-mean normalized cross-correlation of the winning candidate, in
  // [-1, 1]. Meaningless when degenerate.
  double score = 0.0;
  // Set when the template or every candidate patch has zero variance; the
  // box is then held at last_box.
  bool degenerate = false;
};

TrackerState init_tracker(const GrayImage& frame, const BoundingBox& box,
                          int search_radius_px = 32);

// Searches all integer offsets within Chebyshev distance search_radius_px of
// last_box (clamped to image bounds) for the template's best zero-mean NCC
// match. Ties go to the smallest (dy, dx) lexicographically. Updates
// state.last_box.
TrackResult track_next(TrackerState& state, const GrayImage& frame);

// Ground-truth passthrough; isolates downstream stages from tracker error.
BoundingBox oracle_track(const Scene& scene, int idx);

// Streaming interface over a scene: one box per frame, frame 0 being the
// annotated init box.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual TrackResult next(int frame_idx, const GrayImage& frame) = 0;
};

// name is "ncc" or "oracle".
std::unique_ptr<Tracker> make_tracker(const std::string& name, const SceneBundle& bundle,
                                      int search_radius_px = 32);

struct TrackedBoxes {
  std::vector<BoundingBox> boxes;
  std::vector<double> scores;
  std::vector<char> degenerate;
};

TrackedBoxes track_scene(const SceneBundle& bundle, const std::string& tracker_name,
                         int search_radius_px = 32);

}  // namespace leadvel

#include "leadvel/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "leadvel/dataset_io.hpp"
#include "leadvel/errors.hpp"

namespace leadvel {

namespace {

GrayImage crop(const GrayImage& frame, const BoundingBox& box) {
  GrayImage out;
  out.width = box.w;
  out.height = box.h;
  out.values.resize(static_cast<size_t>(box.w) * box.h);
  for (int row = 0; row < box.h; ++row) {
    const std::uint8_t* src = frame.values.data() + static_cast<size_t>(box.y + row) * frame.width + box.x;
    std::copy(src, src + box.w, out.values.data() + static_cast<size_t>(row) * box.w);
  }
  return out;
}

struct PatchSums {
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
};

PatchSums patch_sums(const GrayImage& frame, int x, int y, int w, int h) {
  PatchSums s;
  for (int row = 0; row < h; ++row) {
    const std::uint8_t* p = frame.values.data() + static_cast<size_t>(y + row) * frame.width + x;
    for (int col = 0; col < w; ++col) {
      s.sum += p[col];
      s.sum_sq += static_cast<std::int64_t>(p[col]) * p[col];
    }
  }
  return s;
}

// Integer identity: variance is exactly zero iff n*sum_sq == sum*sum.
bool zero_variance(const PatchSums& s, std::int64_t n) {
  return n * s.sum_sq == s.sum * s.sum;
}

}  // namespace

TrackerState init_tracker(const GrayImage& frame, const BoundingBox& box,
                          int search_radius_px) {
  if (!box.fits_within(frame.width, frame.height)) {
    raise(ErrorKind::box_out_of_bounds,
          "init box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
              std::to_string(box.w) + "," + std::to_string(box.h) + ") exceeds frame " +
              std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  if (search_radius_px < 1) {
    raise(ErrorKind::config_invalid, "search_radius_px must be >= 1");
  }
  TrackerState state;
  state.templ = crop(frame, box);
  state.last_box = box;
  state.search_radius_px = search_radius_px;
  state.frame_width = frame.width;
  state.frame_height = frame.height;
  return state;
}

TrackResult track_next(TrackerState& state, const GrayImage& frame) {
  if (frame.width != state.frame_width || frame.height != state.frame_height) {
    raise(ErrorKind::dimension_mismatch,
          "frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
              " does not match init frame " + std::to_string(state.frame_width) + "x" +
              std::to_string(state.frame_height));
  }

  const GrayImage& templ = state.templ;
  const int w = templ.width;
  const int h = templ.height;
  const std::int64_t n = static_cast<std::int64_t>(w) * h;

  const PatchSums templ_sums = patch_sums(templ, 0, 0, w, h);
  if (zero_variance(templ_sums, n)) {
    return TrackResult{state.last_box, 0.0, true};
  }

  // Zero-mean template, precomputed once per call.
  const double templ_mean = static_cast<double>(templ_sums.sum) / static_cast<double>(n);
  std::vector<double> templ_centered(static_cast<size_t>(n));
  double templ_var_num = 0.0;
  double templ_centered_sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(templ.values[static_cast<size_t>(i)]) - templ_mean;
    templ_centered[static_cast<size_t>(i)] = v;
    templ_var_num += v * v;
    templ_centered_sum += v;
  }

  const int radius = state.search_radius_px;
  const int y_lo = std::max(0, state.last_box.y - radius);
  const int y_hi = std::min(frame.height - h, state.last_box.y + radius);
  const int x_lo = std::max(0, state.last_box.x - radius);
  const int x_hi = std::min(frame.width - w, state.last_box.x + radius);

  double best_score = -std::numeric_limits<double>::infinity();
  int best_x = state.last_box.x;
  int best_y = state.last_box.y;
  bool found = false;

  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const PatchSums ps = patch_sums(frame, x, y, w, h);
      if (zero_variance(ps, n)) continue;

      const double patch_mean = static_cast<double>(ps.sum) / static_cast<double>(n);
      double cross = 0.0;
      for (int row = 0; row < h; ++row) {
        const std::uint8_t* p = frame.values.data() + static_cast<size_t>(y + row) * frame.width + x;
        const double* t = templ_centered.data() + static_cast<size_t>(row) * w;
        for (int col = 0; col < w; ++col) {
          cross += t[col] * p[col];
        }
      }
      cross -= patch_mean * templ_centered_sum;
      const double patch_var_num =
          static_cast<double>(ps.sum_sq) - patch_mean * static_cast<double>(ps.sum);
      const double score = cross / std::sqrt(templ_var_num * patch_var_num);
      if (score > best_score) {
        best_score = score;
        best_x = x;
        best_y = y;
        found = true;
      }
    }
  }

  if (!found) {
    // Every candidate patch was flat; hold position.
    return TrackResult{state.last_box, 0.0, true};
  }
  const BoundingBox box{best_x, best_y, w, h};
  state.last_box = box;
  return TrackResult{box, best_score, false};
}

BoundingBox oracle_track(const Scene& scene, int idx) {
  if (idx < 0 || idx >= static_cast<int>(scene.frames.size())) {
    raise(ErrorKind::index_out_of_range,
          "frame " + std::to_string(idx) + " of " + std::to_string(scene.frames.size()));
  }
  const auto& bbox = scene.frames[static_cast<size_t>(idx)].lead_bbox;
  if (!bbox) {
    raise(ErrorKind::missing_ground_truth,
          "frame " + std::to_string(idx) + " carries no lead_bbox annotation");
  }
  return *bbox;
}

namespace {

class NccTracker final : public Tracker {
 public:
  NccTracker(const GrayImage& first_frame, const BoundingBox& init_box, int radius)
      : state_(init_tracker(first_frame, init_box, radius)), init_box_(init_box) {}

  TrackResult next(int frame_idx, const GrayImage& frame) override {
    if (frame_idx == 0) return TrackResult{init_box_, 1.0, false};
    return track_next(state_, frame);
  }

 private:
  TrackerState state_;
  BoundingBox init_box_;
};

class OracleTracker final : public Tracker {
 public:
  explicit OracleTracker(const Scene& scene) : scene_(scene) {}

  TrackResult next(int frame_idx, const GrayImage&) override {
    return TrackResult{oracle_track(scene_, frame_idx), 1.0, false};
  }

 private:
  const Scene& scene_;
};

}  // namespace

std::unique_ptr<Tracker> make_tracker(const std::string& name, const SceneBundle& bundle,
                                      int search_radius_px) {
  if (bundle.scene.frames.empty() || !bundle.scene.frames.front().lead_bbox) {
    raise(ErrorKind::invariant_violation, "scene has no first-frame lead_bbox");
  }
  if (name == "ncc") {
    if (bundle.images.empty()) {
      raise(ErrorKind::invariant_violation, "ncc tracker needs tracking images");
    }
    return std::make_unique<NccTracker>(bundle.images.front(),
                                        *bundle.scene.frames.front().lead_bbox,
                                        search_radius_px);
  }
  if (name == "oracle") {
    return std::make_unique<OracleTracker>(bundle.scene);
  }
  raise(ErrorKind::config_invalid, "unknown tracker \"" + name + "\" (want ncc|oracle)");
}

TrackedBoxes track_scene(const SceneBundle& bundle, const std::string& tracker_name,
                         int search_radius_px) {
  auto tracker = make_tracker(tracker_name, bundle, search_radius_px);
  TrackedBoxes out;
  const size_t n = bundle.scene.frames.size();
  out.boxes.reserve(n);
  out.scores.reserve(n);
  out.degenerate.reserve(n);
  static const GrayImage empty_image;
  for (size_t i = 0; i < n; ++i) {
    const GrayImage& frame = i < bundle.images.size() ? bundle.images[i] : empty_image;
    const TrackResult r = tracker->next(static_cast<int>(i), frame);
    out.boxes.push_back(r.box);
    out.scores.push_back(r.score);
    out.degenerate.push_back(r.degenerate ? 1 : 0);
  }
  return out;
}

}  // namespace leadvel

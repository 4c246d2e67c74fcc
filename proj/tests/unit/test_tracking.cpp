#include "doctest.h"

#include <cmath>

#include "leadvel/errors.hpp"
#include "leadvel/rng.hpp"
#include "leadvel/tracking.hpp"

#include "test_util.hpp"

using namespace leadvel;

namespace {

GrayImage textured_image(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img;
  img.width = width;
  img.height = height;
  img.values.resize(static_cast<size_t>(width) * height);
  for (auto& v : img.values) v = static_cast<std::uint8_t>(rng.index_below(256));
  return img;
}

// Cyclic shift: every pixel keeps its texture, so an in-radius translation
// has an exact match somewhere.
GrayImage rolled(const GrayImage& src, int dx, int dy) {
  GrayImage out;
  out.width = src.width;
  out.height = src.height;
  out.values.resize(src.values.size());
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const int sx = ((x - dx) % src.width + src.width) % src.width;
      const int sy = ((y - dy) % src.height + src.height) % src.height;
      out.values[static_cast<size_t>(y) * src.width + x] = src.at(sx, sy);
    }
  }
  return out;
}

// Independent exhaustive zero-mean NCC search with the same window and tie
// rules, written directly from the definition.
BoundingBox exhaustive_ncc_oracle(const GrayImage& templ, const GrayImage& frame,
                                  const BoundingBox& last, int radius) {
  const int w = templ.width;
  const int h = templ.height;
  const double n = static_cast<double>(w) * h;

  double t_mean = 0.0;
  for (std::uint8_t v : templ.values) t_mean += v;
  t_mean /= n;

  double best = -2.0;
  BoundingBox best_box = last;
  for (int y = std::max(0, last.y - radius); y <= std::min(frame.height - h, last.y + radius); ++y) {
    for (int x = std::max(0, last.x - radius); x <= std::min(frame.width - w, last.x + radius); ++x) {
      double p_mean = 0.0;
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) p_mean += frame.at(x + c, y + r);
      p_mean /= n;
      double num = 0.0, tv = 0.0, pv = 0.0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const double td = templ.at(c, r) - t_mean;
          const double pd = frame.at(x + c, y + r) - p_mean;
          num += td * pd;
          tv += td * td;
          pv += pd * pd;
        }
      }
      if (tv <= 0.0 || pv <= 0.0) continue;
      const double score = num / std::sqrt(tv * pv);
      if (score > best) {
        best = score;
        best_box = BoundingBox{x, y, w, h};
      }
    }
  }
  return best_box;
}

}  // namespace

TEST_SUITE_BEGIN("tracking");

TEST_CASE("init crops the exact template") {
  const GrayImage frame = textured_image(100, 100, 5);
  const BoundingBox box{10, 10, 20, 20};
  const TrackerState state = init_tracker(frame, box, 8);
  CHECK(state.last_box == box);
  CHECK(state.templ.width == 20);
  CHECK(state.templ.height == 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) CHECK(state.templ.at(x, y) == frame.at(10 + x, 10 + y));
}

TEST_CASE("init rejects out-of-bounds boxes") {
  const GrayImage frame = textured_image(100, 100, 6);
  try {
    init_tracker(frame, BoundingBox{95, 95, 20, 20}, 8);
    FAIL("expected BoxOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::box_out_of_bounds);
  }
}

TEST_CASE("constant frame yields a constant template") {
  GrayImage frame;
  frame.width = 40;
  frame.height = 30;
  frame.values.assign(1200, 77);
  const TrackerState state = init_tracker(frame, BoundingBox{5, 5, 10, 10}, 4);
  for (std::uint8_t v : state.templ.values) CHECK(v == 77);
}

TEST_CASE("self-match stays put with score 1") {
  const GrayImage frame = textured_image(120, 90, 7);
  const BoundingBox box{30, 20, 24, 18};
  TrackerState state = init_tracker(frame, box, 10);
  const TrackResult r = track_next(state, frame);
  CHECK(r.box == box);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!r.degenerate);
}

TEST_CASE("integer translations are recovered exactly") {
  const GrayImage base = textured_image(160, 120, 8);
  const BoundingBox box{60, 50, 30, 22};

  const std::vector<std::pair<int, int>> shifts = {{3, 2}, {-4, 1}, {0, -5}, {7, 7}};
  for (const auto& [dx, dy] : shifts) {
    TrackerState state = init_tracker(base, box, 8);
    const GrayImage moved = rolled(base, dx, dy);
    const TrackResult r = track_next(state, moved);
    CHECK(r.box.x == box.x + dx);
    CHECK(r.box.y == box.y + dy);
    CHECK(r.box == exhaustive_ncc_oracle(state.templ, moved, box, 8));
  }
}

TEST_CASE("tracker matches the exhaustive oracle on arbitrary frames") {
  const GrayImage base = textured_image(100, 80, 9);
  const BoundingBox box{40, 30, 16, 12};
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    TrackerState state = init_tracker(base, box, 6);
    const GrayImage noise_frame = textured_image(100, 80, seed);
    const TrackResult r = track_next(state, noise_frame);
    CHECK(r.box == exhaustive_ncc_oracle(init_tracker(base, box, 6).templ, noise_frame, box, 6));
  }
}

TEST_CASE("constant frame degenerates to last box") {
  const GrayImage base = textured_image(100, 80, 10);
  const BoundingBox box{40, 30, 16, 12};
  TrackerState state = init_tracker(base, box, 6);
  GrayImage flat;
  flat.width = 100;
  flat.height = 80;
  flat.values.assign(8000, 50);
  const TrackResult r = track_next(state, flat);
  CHECK(r.box == box);
  CHECK(r.degenerate);
}

TEST_CASE("zero-variance template degenerates immediately") {
  GrayImage flat;
  flat.width = 60;
  flat.height = 60;
  flat.values.assign(3600, 9);
  TrackerState state = init_tracker(flat, BoundingBox{10, 10, 8, 8}, 5);
  const TrackResult r = track_next(state, textured_image(60, 60, 11));
  CHECK(r.box == BoundingBox{10, 10, 8, 8});
  CHECK(r.degenerate);
}

TEST_CASE("frame size changes are rejected") {
  const GrayImage base = textured_image(64, 48, 12);
  TrackerState state = init_tracker(base, BoundingBox{10, 10, 10, 10}, 4);
  try {
    track_next(state, textured_image(60, 48, 12));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("boxes always stay inside the frame") {
  const GrayImage base = textured_image(80, 60, 13);
  const BoundingBox box{2, 2, 12, 10};  // near the corner, radius larger than margin
  TrackerState state = init_tracker(base, box, 20);
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const TrackResult r = track_next(state, textured_image(80, 60, seed));
    CHECK(r.box.fits_within(80, 60));
  }
}

TEST_CASE("tracking is deterministic") {
  const GrayImage base = textured_image(90, 70, 14);
  const GrayImage next = rolled(base, 2, -1);
  const BoundingBox box{30, 25, 20, 16};
  TrackerState s1 = init_tracker(base, box, 8);
  TrackerState s2 = init_tracker(base, box, 8);
  const TrackResult r1 = track_next(s1, next);
  const TrackResult r2 = track_next(s2, next);
  CHECK(r1.box == r2.box);
  CHECK(r1.score == r2.score);
}

TEST_CASE("oracle tracker returns annotations verbatim") {
  const SceneBundle bundle = test::tiny_bundle(3);
  CHECK(oracle_track(bundle.scene, 0) == BoundingBox{2, 1, 4, 4});
  CHECK(oracle_track(bundle.scene, 2) == BoundingBox{2, 1, 4, 4});

  SceneBundle stripped = bundle;
  stripped.scene.frames[2].lead_bbox.reset();
  try {
    oracle_track(stripped.scene, 2);
    FAIL("expected MissingGroundTruth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_ground_truth);
  }
}

TEST_CASE("track_scene emits one box per frame for both trackers") {
  const SceneBundle bundle = test::tiny_bundle(4);
  for (const char* name : {"oracle", "ncc"}) {
    const TrackedBoxes tracked = track_scene(bundle, name, 8);
    CHECK(tracked.boxes.size() == 4);
    CHECK(tracked.boxes[0] == BoundingBox{2, 1, 4, 4});
  }
  CHECK_THROWS_AS(track_scene(bundle, "nope", 8), Error);
}

TEST_SUITE_END();

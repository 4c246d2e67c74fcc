#include "doctest.h"

#include "leadvel/types.hpp"

#include "test_util.hpp"

using namespace leadvel;

TEST_SUITE_BEGIN("types");

TEST_CASE("well-formed scene has no violations") {
  const Scene scene = test::tiny_bundle(3).scene;
  CHECK(validate_scene(scene).empty());
}

TEST_CASE("missing first-frame bbox is one violation naming frame 0") {
  Scene scene = test::tiny_bundle(3).scene;
  scene.frames[0].lead_bbox.reset();
  const auto violations = validate_scene(scene);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("frame 0") != std::string::npos);
  CHECK(violations[0].find("lead_bbox") != std::string::npos);
}

TEST_CASE("non-contiguous frame idx is flagged") {
  Scene scene = test::tiny_bundle(2).scene;
  scene.frames[1].idx = 2;  // sequence 0,2
  const auto violations = validate_scene(scene);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("non-contiguous idx") != std::string::npos);
}

TEST_CASE("empty scene is invalid") {
  Scene scene;
  scene.fps = 10.0;
  scene.rig = CameraRig{0.35, 1400.0};
  const auto violations = validate_scene(scene);
  REQUIRE(!violations.empty());
  CHECK(violations.back().find("non-empty") != std::string::npos);
}

TEST_CASE("field violations carry the frame index") {
  Scene scene = test::tiny_bundle(3).scene;

  SUBCASE("negative ego velocity") {
    scene.frames[2].ego_velocity_mps = -1.0;
    const auto violations = validate_scene(scene);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("frame 2") != std::string::npos);
    CHECK(violations[0].find("ego_velocity") != std::string::npos);
  }
  SUBCASE("non-positive lead distance") {
    scene.frames[1].lead_distance_m = 0.0;
    const auto violations = validate_scene(scene);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("frame 1") != std::string::npos);
  }
  SUBCASE("raster length mismatch") {
    scene.frames[1].disparity.values.pop_back();
    const auto violations = validate_scene(scene);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("width*height") != std::string::npos);
  }
  SUBCASE("negative disparity value") {
    scene.frames[0].disparity.values[3] = -0.5f;
    CHECK(validate_scene(scene).size() == 1);
  }
  SUBCASE("bbox outside raster") {
    scene.frames[1].lead_bbox = BoundingBox{6, 4, 4, 4};  // 6+4 > 8
    const auto violations = validate_scene(scene);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("frame 1") != std::string::npos);
    CHECK(violations[0].find("lead_bbox") != std::string::npos);
  }
}

TEST_CASE("validation is pure") {
  Scene scene = test::tiny_bundle(4).scene;
  scene.frames[3].ego_velocity_mps = -2.0;
  CHECK(validate_scene(scene) == validate_scene(scene));
}

TEST_SUITE_END();

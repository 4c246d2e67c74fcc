#include "doctest.h"

#include <cstring>

#include "leadvel/dataset_io.hpp"
#include "leadvel/errors.hpp"
#include "leadvel/rng.hpp"
#include "leadvel/synthetic.hpp"

#include "test_util.hpp"

using namespace leadvel;

namespace {

std::vector<std::uint8_t> pgm16(const std::string& header,
                                const std::vector<std::uint16_t>& samples) {
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (std::uint16_t s : samples) {
    bytes.push_back(static_cast<std::uint8_t>(s >> 8));
    bytes.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  return bytes;
}

}  // namespace

TEST_SUITE_BEGIN("dataset_io");

TEST_CASE("16-bit PGM decodes Q8.8 with 0 as the invalid sentinel") {
  const auto bytes = pgm16("P5\n2 1\n65535\n", {256, 0});
  const DisparityMap map = read_disparity_pgm(bytes);
  CHECK(map.width == 2);
  CHECK(map.height == 1);
  CHECK(map.values[0] == 1.0f);
  CHECK(map.values[1] == 0.0f);
}

TEST_CASE("raw sample 12800 decodes to 50 px") {
  const auto bytes = pgm16("P5\n1 1\n65535\n", {12800});
  CHECK(read_disparity_pgm(bytes).values[0] == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("decoder rejects malformed input with typed errors") {
  SUBCASE("bad magic") {
    const std::string text = "P6\n1 1\n65535\nxx";
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    try {
      read_disparity_pgm(bytes);
      FAIL("expected BadMagic");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::bad_magic);
      CHECK(std::string(e.what()).find("P5") != std::string::npos);
    }
  }
  SUBCASE("maxval 255 on the disparity path") {
    const auto bytes = pgm16("P5\n1 1\n255\n", {1});
    try {
      read_disparity_pgm(bytes);
      FAIL("expected BadMaxval");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::bad_maxval);
    }
  }
  SUBCASE("truncated payload: 4x4 header with 30 bytes") {
    auto bytes = pgm16("P5\n4 4\n65535\n", std::vector<std::uint16_t>(15, 7));
    // 15 samples = 30 bytes < 32 expected
    try {
      read_disparity_pgm(bytes);
      FAIL("expected TruncatedPayload");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::truncated_payload);
    }
  }
}

TEST_CASE("PGM comments and whitespace are tolerated") {
  const auto bytes = pgm16("P5\n# a comment\n2 1\n# another\n65535\n", {512, 256});
  const DisparityMap map = read_disparity_pgm(bytes);
  CHECK(map.values[0] == 2.0f);
  CHECK(map.values[1] == 1.0f);
}

TEST_CASE("disparity 50.004 is stored as raw 12801 and reloads as 50.00390625") {
  DisparityMap map;
  map.width = 1;
  map.height = 1;
  map.values = {50.004f};
  const auto bytes = write_disparity_pgm(map);
  // payload is the last two bytes
  const std::uint16_t raw =
      static_cast<std::uint16_t>((bytes[bytes.size() - 2] << 8) | bytes.back());
  CHECK(raw == 12801);
  const DisparityMap reloaded = read_disparity_pgm(bytes);
  CHECK(reloaded.values[0] == 50.00390625f);
}

TEST_CASE("8-bit grayscale round-trips") {
  GrayImage img;
  img.width = 3;
  img.height = 2;
  img.values = {0, 10, 255, 7, 8, 9};
  CHECK(read_gray_pgm(write_gray_pgm(img)) == img);
}

TEST_CASE("save then load reproduces the scene exactly") {
  test::TempDir dir("roundtrip");
  const SceneBundle bundle = test::tiny_bundle(3);
  save_scene(bundle, dir.path());
  const SceneBundle loaded = load_scene(dir.path());
  CHECK(loaded == bundle);
}

TEST_CASE("save-load-save is byte identical") {
  test::TempDir first("save1");
  test::TempDir second("save2");
  ScenarioConfig cfg;
  cfg.n_frames = 6;
  cfg.image_width = 32;
  cfg.image_height = 24;
  cfg.rig = CameraRig{0.35, 120.0};
  cfg.noise_sigma_px = 0.7;
  cfg.contamination_fraction = 0.2;
  cfg.rng_seed = 99;
  const GeneratedScene generated = generate_scene(cfg);
  save_scene(generated.bundle, first.path());
  save_scene(load_scene(first.path()), second.path());
  CHECK(test::directories_identical(first.path(), second.path()));
}

TEST_CASE("missing raster file names the file") {
  test::TempDir dir("missing");
  save_scene(test::tiny_bundle(2), dir.path());
  std::filesystem::remove(dir.path() / "disp_0001.pgm");
  try {
    load_scene(dir.path());
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_file);
    CHECK(std::string(e.what()).find("disp_0001.pgm") != std::string::npos);
  }
}

TEST_CASE("malformed JSON reports position and reason") {
  test::TempDir dir("badjson");
  save_scene(test::tiny_bundle(1), dir.path());
  std::ofstream(dir.path() / "scene.json") << "{\"scene_id\": }";
  try {
    load_scene(dir.path());
    FAIL("expected MalformedJson");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::malformed_json);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("raster shape mismatch is detected") {
  test::TempDir dir("shape");
  SceneBundle bundle = test::tiny_bundle(2);
  save_scene(bundle, dir.path());
  // overwrite frame 1's disparity with a smaller raster
  DisparityMap small;
  small.width = 4;
  small.height = 3;
  small.values.assign(12, 1.0f);
  const auto bytes = write_disparity_pgm(small);
  std::ofstream(dir.path() / "disp_0001.pgm", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  try {
    load_scene(dir.path());
    FAIL("expected RasterShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::raster_shape_mismatch);
  }
}

TEST_CASE("saving an invalid scene is rejected before any write") {
  test::TempDir dir("reject");
  SceneBundle bundle = test::tiny_bundle(1);
  bundle.scene.frames.clear();
  bundle.images.clear();
  CHECK_THROWS_AS(save_scene(bundle, dir.path() / "sub"), Error);
  CHECK(!std::filesystem::exists(dir.path() / "sub" / "scene.json"));
}

TEST_CASE("decoder survives arbitrary byte soup with typed errors only") {
  Rng rng(8080);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint8_t> bytes(rng.index_below(64));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.index_below(256));
    if (trial % 3 == 0 && bytes.size() >= 2) {
      bytes[0] = 'P';
      bytes[1] = '5';
    }
    try {
      read_disparity_pgm(bytes);
    } catch (const Error&) {
      // typed failure is the contract
    }
    try {
      read_gray_pgm(bytes);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("test-style scenes (first-frame box only) load cleanly") {
  test::TempDir dir("teststyle");
  SceneBundle bundle = test::tiny_bundle(4);
  for (size_t i = 0; i < bundle.scene.frames.size(); ++i) {
    FrameRecord& f = bundle.scene.frames[i];
    f.lead_velocity_mps.reset();
    f.lead_distance_m.reset();
    if (i > 0) f.lead_bbox.reset();
  }
  save_scene(bundle, dir.path());
  const SceneBundle loaded = load_scene(dir.path());
  CHECK(loaded == bundle);
  CHECK(loaded.scene.frames[0].lead_bbox.has_value());
  CHECK(!loaded.scene.frames[1].lead_bbox.has_value());
  CHECK(!loaded.scene.frames[2].lead_velocity_mps.has_value());
}

TEST_CASE("duplicate raster references violate the manifest invariant") {
  test::TempDir dir("dup");
  save_scene(test::tiny_bundle(2), dir.path());
  // point frame 1's disparity_file at frame 0's raster
  auto text = test::read_file_bytes(dir.path() / "scene.json");
  std::string json(text.begin(), text.end());
  const auto pos = json.find("disp_0001.pgm");
  REQUIRE(pos != std::string::npos);
  json.replace(pos, strlen("disp_0001.pgm"), "disp_0000.pgm");
  std::ofstream(dir.path() / "scene.json") << json;
  try {
    load_scene(dir.path());
    FAIL("expected InvariantViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invariant_violation);
  }
}

TEST_SUITE_END();

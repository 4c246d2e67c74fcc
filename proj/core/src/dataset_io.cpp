#include "leadvel/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "leadvel/errors.hpp"

namespace leadvel {

namespace {

using json = nlohmann::ordered_json;

// --------------- PGM primitives ---------------

struct PgmHeader {
  int width = 0;
  int height = 0;
  long maxval = 0;
  size_t payload_offset = 0;
};

bool is_pgm_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Parses "P5 <w> <h> <maxval>" with '#' comments, leaving payload_offset just
// past the single whitespace byte that terminates the maxval token.
PgmHeader parse_pgm_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    raise(ErrorKind::bad_magic, "expected binary PGM magic \"P5\"");
  }
  size_t pos = 2;
  long fields[3] = {0, 0, 0};
  for (long& field : fields) {
    // skip whitespace and comment lines
    while (pos < bytes.size()) {
      if (is_pgm_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
      raise(ErrorKind::truncated_payload, "PGM header ended before width/height/maxval");
    }
    long value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000L) {
        raise(ErrorKind::truncated_payload, "PGM header field out of range");
      }
      ++pos;
    }
    field = value;
  }
  if (pos >= bytes.size() || !is_pgm_space(bytes[pos])) {
    raise(ErrorKind::truncated_payload, "PGM header not terminated by whitespace");
  }
  ++pos;

  PgmHeader header;
  header.width = static_cast<int>(fields[0]);
  header.height = static_cast<int>(fields[1]);
  header.maxval = fields[2];
  header.payload_offset = pos;
  if (header.width <= 0 || header.height <= 0) {
    raise(ErrorKind::truncated_payload, "PGM header has non-positive dimensions");
  }
  return header;
}

void append_header(std::vector<std::uint8_t>& out, int width, int height, int maxval) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "P5\n%d %d\n%d\n", width, height, maxval);
  out.insert(out.end(), buf, buf + n);
}

// --------------- filesystem helpers ---------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorKind::missing_file, path.filename().string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    raise(ErrorKind::io_failure, "while reading " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    raise(ErrorKind::io_failure, "while writing " + path.string());
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    raise(ErrorKind::malformed_json, where + ": missing numeric key \"" + key + "\"");
  }
  return it->get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    raise(ErrorKind::malformed_json, where + ": missing string key \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

std::string disparity_file_name(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "disp_%04d.pgm", idx);
  return buf;
}

std::string image_file_name(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%04d.pgm", idx);
  return buf;
}

DisparityMap read_disparity_pgm(std::span<const std::uint8_t> bytes) {
  const PgmHeader header = parse_pgm_header(bytes);
  if (header.maxval != 65535) {
    raise(ErrorKind::bad_maxval,
          "disparity PGM must have maxval 65535, got " + std::to_string(header.maxval));
  }
  const size_t n = static_cast<size_t>(header.width) * header.height;
  if (bytes.size() < header.payload_offset + 2 * n) {
    raise(ErrorKind::truncated_payload,
          "expected " + std::to_string(2 * n) + " payload bytes, got " +
              std::to_string(bytes.size() - header.payload_offset));
  }
  DisparityMap map;
  map.width = header.width;
  map.height = header.height;
  map.values.resize(n);
  const std::uint8_t* p = bytes.data() + header.payload_offset;
  for (size_t i = 0; i < n; ++i) {
    const std::uint16_t raw = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    map.values[i] = static_cast<float>(raw) / 256.0f;
  }
  return map;
}

std::vector<std::uint8_t> write_disparity_pgm(const DisparityMap& map) {
  std::vector<std::uint8_t> out;
  const size_t n = static_cast<size_t>(map.width) * map.height;
  out.reserve(n * 2 + 32);
  append_header(out, map.width, map.height, 65535);
  for (size_t i = 0; i < n; ++i) {
    double raw = std::round(static_cast<double>(map.values[i]) * 256.0);
    if (raw < 0) raw = 0;
    if (raw > 65535) raw = 65535;
    const auto q = static_cast<std::uint16_t>(raw);
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

GrayImage read_gray_pgm(std::span<const std::uint8_t> bytes) {
  const PgmHeader header = parse_pgm_header(bytes);
  if (header.maxval != 255) {
    raise(ErrorKind::bad_maxval,
          "grayscale PGM must have maxval 255, got " + std::to_string(header.maxval));
  }
  const size_t n = static_cast<size_t>(header.width) * header.height;
  if (bytes.size() < header.payload_offset + n) {
    raise(ErrorKind::truncated_payload,
          "expected " + std::to_string(n) + " payload bytes, got " +
              std::to_string(bytes.size() - header.payload_offset));
  }
  GrayImage image;
  image.width = header.width;
  image.height = header.height;
  image.values.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header.payload_offset),
                      bytes.begin() + static_cast<std::ptrdiff_t>(header.payload_offset + n));
  return image;
}

std::vector<std::uint8_t> write_gray_pgm(const GrayImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.values.size() + 32);
  append_header(out, image.width, image.height, 255);
  out.insert(out.end(), image.values.begin(), image.values.end());
  return out;
}

SceneBundle load_scene(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "scene.json";
  const auto manifest_bytes = read_file(manifest_path);

  json doc;
  try {
    doc = json::parse(manifest_bytes.begin(), manifest_bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::malformed_json,
          "scene.json byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) {
    raise(ErrorKind::malformed_json, "scene.json: top level must be an object");
  }

  SceneBundle bundle;
  Scene& scene = bundle.scene;
  scene.scene_id = require_string(doc, "scene_id", "scene.json");
  scene.fps = require_number(doc, "fps", "scene.json");

  auto camera_it = doc.find("camera");
  if (camera_it == doc.end() || !camera_it->is_object()) {
    raise(ErrorKind::malformed_json, "scene.json: missing object key \"camera\"");
  }
  scene.rig.offset_m = require_number(*camera_it, "offset_m", "camera");
  scene.rig.focal_length_px = require_number(*camera_it, "focal_length_px", "camera");

  auto frames_it = doc.find("frames");
  if (frames_it == doc.end() || !frames_it->is_array()) {
    raise(ErrorKind::malformed_json, "scene.json: missing array key \"frames\"");
  }

  std::set<std::string> seen_files;
  for (const json& fj : *frames_it) {
    const std::string where = "frames[" + std::to_string(scene.frames.size()) + "]";
    if (!fj.is_object()) {
      raise(ErrorKind::malformed_json, where + ": frame entry must be an object");
    }
    FrameRecord frame;
    frame.idx = static_cast<int>(require_number(fj, "idx", where));
    frame.ego_velocity_mps = require_number(fj, "ego_velocity_mps", where);
    frame.steering_angle_deg = require_number(fj, "steering_angle_deg", where);
    const std::string disparity_file = require_string(fj, "disparity_file", where);
    const std::string image_file = require_string(fj, "image_file", where);
    for (const std::string& name : {disparity_file, image_file}) {
      if (!seen_files.insert(name).second) {
        raise(ErrorKind::invariant_violation,
              where + ": raster file \"" + name + "\" referenced more than once");
      }
    }
    if (auto it = fj.find("lead_bbox"); it != fj.end()) {
      if (!it->is_array() || it->size() != 4) {
        raise(ErrorKind::malformed_json, where + ": lead_bbox must be [x,y,w,h]");
      }
      frame.lead_bbox = BoundingBox{(*it)[0].get<int>(), (*it)[1].get<int>(),
                                    (*it)[2].get<int>(), (*it)[3].get<int>()};
    }
    if (auto it = fj.find("lead_velocity_mps"); it != fj.end()) {
      frame.lead_velocity_mps = it->get<double>();
    }
    if (auto it = fj.find("lead_distance_m"); it != fj.end()) {
      frame.lead_distance_m = it->get<double>();
    }

    frame.disparity = read_disparity_pgm(read_file(dir / disparity_file));
    bundle.images.push_back(read_gray_pgm(read_file(dir / image_file)));
    scene.frames.push_back(std::move(frame));
  }

  // All rasters in a scene share one geometry.
  if (!scene.frames.empty()) {
    const int w = scene.frames.front().disparity.width;
    const int h = scene.frames.front().disparity.height;
    for (size_t i = 0; i < scene.frames.size(); ++i) {
      const DisparityMap& d = scene.frames[i].disparity;
      const GrayImage& img = bundle.images[i];
      if (d.width != w || d.height != h || img.width != w || img.height != h) {
        raise(ErrorKind::raster_shape_mismatch,
              "frame " + std::to_string(i) + ": expected " + std::to_string(w) + "x" +
                  std::to_string(h) + ", got disparity " + std::to_string(d.width) + "x" +
                  std::to_string(d.height) + ", image " + std::to_string(img.width) + "x" +
                  std::to_string(img.height));
      }
    }
  }

  if (auto violations = validate_scene(scene); !violations.empty()) {
    std::string msg = "scene fails validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    raise(ErrorKind::invariant_violation, msg);
  }
  return bundle;
}

void save_scene(const SceneBundle& bundle, const std::filesystem::path& dir) {
  const Scene& scene = bundle.scene;
  if (auto violations = validate_scene(scene); !violations.empty()) {
    std::string msg = "refusing to save invalid scene:";
    for (const auto& v : violations) msg += "\n  " + v;
    raise(ErrorKind::invariant_violation, msg);
  }
  if (bundle.images.size() != scene.frames.size()) {
    raise(ErrorKind::invariant_violation, "one tracking image required per frame");
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    raise(ErrorKind::io_failure, "cannot create " + dir.string() + ": " + ec.message());
  }

  json doc;
  doc["scene_id"] = scene.scene_id;
  doc["fps"] = scene.fps;
  doc["camera"] = {{"offset_m", scene.rig.offset_m},
                   {"focal_length_px", scene.rig.focal_length_px}};
  json frames = json::array();
  for (size_t i = 0; i < scene.frames.size(); ++i) {
    const FrameRecord& frame = scene.frames[i];
    json fj;
    fj["idx"] = frame.idx;
    fj["ego_velocity_mps"] = frame.ego_velocity_mps;
    fj["steering_angle_deg"] = frame.steering_angle_deg;
    fj["disparity_file"] = disparity_file_name(frame.idx);
    fj["image_file"] = image_file_name(frame.idx);
    if (frame.lead_bbox) {
      fj["lead_bbox"] = {frame.lead_bbox->x, frame.lead_bbox->y, frame.lead_bbox->w,
                         frame.lead_bbox->h};
    }
    if (frame.lead_velocity_mps) fj["lead_velocity_mps"] = *frame.lead_velocity_mps;
    if (frame.lead_distance_m) fj["lead_distance_m"] = *frame.lead_distance_m;
    frames.push_back(std::move(fj));

    const auto disparity_bytes = write_disparity_pgm(frame.disparity);
    write_file(dir / disparity_file_name(frame.idx), disparity_bytes);
    const auto image_bytes = write_gray_pgm(bundle.images[i]);
    write_file(dir / image_file_name(frame.idx), image_bytes);
  }
  doc["frames"] = std::move(frames);

  const std::string text = doc.dump(2) + "\n";
  write_file(dir / "scene.json",
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace leadvel

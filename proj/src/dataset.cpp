#include "sparsear/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sparsear/error.hpp"
#include "sparsear/png_io.hpp"

namespace sparsear {

namespace fs = std::filesystem;
using nlohmann::json;

const DepthMap& Frame::depth(const std::string& source) const {
  auto it = depth_sources.find(source);
  if (it == depth_sources.end()) {
    throw UnknownDepthSourceError(source);
  }
  return it->second;
}

std::vector<std::string> Session::depth_source_names() const {
  std::set<std::string> names;
  for (const auto& f : frames) {
    for (const auto& [name, _] : f.depth_sources) names.insert(name);
  }
  return {names.begin(), names.end()};
}

void PointCloud::append(const PointCloud& other) {
  if (has_colors() != other.has_colors() && !empty() && !other.empty()) {
    colors.clear();
  } else if (other.has_colors()) {
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
}

void SurfaceMesh::validate() const {
  const auto n = static_cast<int>(vertices.size());
  for (const auto& t : triangles) {
    for (int i : t) {
      if (i < 0 || i >= n) throw InvalidInputError("mesh: triangle index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvalidInputError("mesh: degenerate triangle with repeated index");
    }
  }
}

void validate_session(const Session& session) {
  if (session.frames.empty()) {
    throw InvalidInputError("session has no frames");
  }
  if (!(session.nominal_fps > 0.0)) {
    throw InvalidInputError("session nominal_fps must be positive");
  }
  const auto& k = session.intrinsics;
  for (std::size_t i = 0; i < session.frames.size(); ++i) {
    const Frame& f = session.frames[i];
    if (f.rgb.width() != k.width || f.rgb.height() != k.height) {
      throw DimensionMismatchError(f.index, "rgb image is " + std::to_string(f.rgb.width()) + "x" +
                                                std::to_string(f.rgb.height()));
    }
    for (const auto& [name, depth] : f.depth_sources) {
      if (depth.width() != k.width || depth.height() != k.height) {
        throw DimensionMismatchError(f.index, "depth source '" + name + "' is " +
                                                  std::to_string(depth.width()) + "x" +
                                                  std::to_string(depth.height()));
      }
      for (double d : depth.values()) {
        if (!std::isfinite(d) || d < 0.0) {
          throw InvalidInputError("frame " + std::to_string(f.index) + ": depth source '" + name +
                                  "' has negative or non-finite values");
        }
      }
    }
    if (i > 0) {
      const Frame& prev = session.frames[i - 1];
      if (f.index <= prev.index) {
        throw TimestampOrderError(f.index, "frame indices must increase");
      }
      if (f.timestamp_us <= prev.timestamp_us) {
        throw TimestampOrderError(f.index, "timestamps must strictly increase");
      }
    }
  }
}

std::uint16_t encode_depth_mm(double meters, bool* clamped) {
  if (clamped != nullptr) *clamped = false;
  if (!std::isfinite(meters) || meters <= 0.0) return 0;
  if (meters > kMaxEncodableDepth) {
    if (clamped != nullptr) *clamped = true;
    return 65535;
  }
  // nearbyint honours the default round-half-to-even mode.
  return static_cast<std::uint16_t>(std::nearbyint(meters * 1000.0));
}

namespace {

std::string frame_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", i);
  return buf;
}

template <class T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ManifestError(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(where + ": field '" + key + "' has wrong type: " + e.what());
  }
}

fs::path resolve(const fs::path& dir, const std::string& rel) {
  fs::path p = dir / rel;
  if (!fs::exists(p)) throw MissingFileError(p.string());
  return p;
}

}  // namespace

Session load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw MissingFileError(manifest_path.string());
  json manifest;
  {
    std::ifstream in(manifest_path);
    try {
      manifest = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ManifestError("manifest.json is not valid JSON: " + std::string(e.what()));
    }
  }
  const json intr = required<json>(manifest, "intrinsics", "manifest");
  Intrinsics k = [&] {
    try {
      return Intrinsics(required<double>(intr, "fx", "intrinsics"),
                        required<double>(intr, "fy", "intrinsics"),
                        required<double>(intr, "cx", "intrinsics"),
                        required<double>(intr, "cy", "intrinsics"),
                        required<int>(intr, "width", "intrinsics"),
                        required<int>(intr, "height", "intrinsics"));
    } catch (const InvalidInputError& e) {
      throw ManifestError(e.what());
    }
  }();
  Session session{k, manifest.value("nominal_fps", 60.0), {}};

  const json frames = required<json>(manifest, "frames", "manifest");
  if (!frames.is_array() || frames.empty()) {
    throw ManifestError("manifest: 'frames' must be a nonempty array");
  }
  session.frames.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const json& jf = frames[i];
    const std::string where = "frames[" + std::to_string(i) + "]";
    Frame f;
    f.index = required<std::int64_t>(jf, "index", where);
    f.timestamp_us = required<std::int64_t>(jf, "timestamp_us", where);
    const auto pose_values = required<std::vector<double>>(jf, "pose_c2w", where);
    if (pose_values.size() != 16) {
      throw ManifestError(where + ": pose_c2w must have 16 entries");
    }
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m(r, c) = pose_values[static_cast<std::size_t>(4 * r + c)];
    }
    try {
      f.pose = PoseSE3::from_matrix(m);
    } catch (const InvalidInputError& e) {
      throw ManifestError(where + ": invalid pose: " + e.what());
    }
    if (i > 0 && f.timestamp_us <= session.frames.back().timestamp_us) {
      throw TimestampOrderError(f.index, "timestamps must strictly increase");
    }

    f.rgb = png::read_rgb8(resolve(dir, required<std::string>(jf, "rgb", where)));
    if (f.rgb.width() != k.width || f.rgb.height() != k.height) {
      throw DimensionMismatchError(f.index, "rgb image is " + std::to_string(f.rgb.width()) + "x" +
                                                std::to_string(f.rgb.height()));
    }
    if (jf.contains("depth")) {
      const json& jd = jf.at("depth");
      if (!jd.is_object()) throw ManifestError(where + ": 'depth' must be an object");
      for (const auto& [name, rel] : jd.items()) {
        if (!rel.is_string()) throw ManifestError(where + ": depth path must be a string");
        const auto raw = png::read_gray16(resolve(dir, rel.get<std::string>()));
        if (raw.width != k.width || raw.height != k.height) {
          throw DimensionMismatchError(f.index, "depth source '" + name + "' is " +
                                                    std::to_string(raw.width) + "x" +
                                                    std::to_string(raw.height));
        }
        DepthMap depth(raw.width, raw.height);
        for (std::size_t p = 0; p < raw.values.size(); ++p) {
          depth[p] = decode_depth_mm(raw.values[p]);
        }
        f.depth_sources.emplace(name, std::move(depth));
      }
    }
    session.frames.push_back(std::move(f));
  }
  validate_session(session);
  return session;
}

SaveStats save_session(const Session& session, const fs::path& dir) {
  validate_session(session);
  SaveStats stats;
  std::error_code ec;
  fs::create_directories(dir / "rgb", ec);
  if (ec) throw IoError("cannot create " + (dir / "rgb").string() + ": " + ec.message());

  json frames = json::array();
  for (std::size_t i = 0; i < session.frames.size(); ++i) {
    const Frame& f = session.frames[i];
    const std::string name = frame_file_name(i);
    const std::string rgb_rel = "rgb/" + name;
    png::write_rgb8(f.rgb, dir / rgb_rel);

    json depth = json::object();
    for (const auto& [source, map] : f.depth_sources) {
      const std::string rel = "depth/" + source + "/" + name;
      fs::create_directories(dir / "depth" / source, ec);
      if (ec) throw IoError("cannot create depth directory: " + ec.message());
      png::Gray16 raw{map.width(), map.height(), std::vector<std::uint16_t>(map.size())};
      for (std::size_t p = 0; p < map.size(); ++p) {
        bool clamped = false;
        raw.values[p] = encode_depth_mm(map[p], &clamped);
        stats.clamped_depth_values += clamped ? 1 : 0;
      }
      png::write_gray16(raw, dir / rel);
      depth[source] = rel;
      ++stats.depth_maps_written;
    }

    const Mat4 m = f.pose.matrix();
    json pose = json::array();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) pose.push_back(m(r, c));
    }
    frames.push_back(json{{"index", f.index},
                          {"timestamp_us", f.timestamp_us},
                          {"rgb", rgb_rel},
                          {"pose_c2w", pose},
                          {"depth", depth}});
    ++stats.frames_written;
  }

  const auto& k = session.intrinsics;
  json manifest{{"nominal_fps", session.nominal_fps},
                {"intrinsics",
                 {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
                  {"width", k.width}, {"height", k.height}}},
                {"frames", frames}};

  // Manifest goes last and atomically so readers never see dangling paths.
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, dir / "manifest.json", ec);
  if (ec) throw IoError("cannot finalize manifest: " + ec.message());
  return stats;
}

}  // namespace sparsear

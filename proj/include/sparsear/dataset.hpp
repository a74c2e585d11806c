#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sparsear/geometry.hpp"
#include "sparsear/image.hpp"

namespace sparsear {

struct Frame {
  std::int64_t index = 0;
  std::int64_t timestamp_us = 0;
  RgbImage rgb;
  /// Named depth provenances, e.g. "lidar", "fm", "gt", "noisy".
  std::map<std::string, DepthMap> depth_sources;
  PoseSE3 pose;

  bool has_depth(const std::string& source) const { return depth_sources.count(source) != 0; }
  /// Throws UnknownDepthSourceError.
  const DepthMap& depth(const std::string& source) const;
};

struct Session {
  Intrinsics intrinsics;
  double nominal_fps = 60.0;
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  /// Union of depth source names over all frames, sorted.
  std::vector<std::string> depth_source_names() const;
};

/// Checks every Session invariant; throws the matching typed error.
void validate_session(const Session& session);

struct PointCloud {
  std::vector<Vec3> points;
  /// Either empty or one color per point.
  std::vector<Rgb8> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  void append(const PointCloud& other);
};

struct SurfaceMesh {
  PointCloud vertices;
  std::vector<std::array<int, 3>> triangles;

  /// Throws InvalidInputError on out-of-range or repeated indices.
  void validate() const;
};

// Depth PNG encoding: 16-bit millimeters, 0 = no measurement.
inline constexpr double kMaxEncodableDepth = 65.535;

/// Rounds half-to-even. Values above 65.535 m clamp to 65535 and set
/// *clamped when provided.
std::uint16_t encode_depth_mm(double meters, bool* clamped = nullptr);
inline double decode_depth_mm(std::uint16_t mm) { return mm / 1000.0; }

Session load_session(const std::filesystem::path& dir);

struct SaveStats {
  std::size_t frames_written = 0;
  std::size_t depth_maps_written = 0;
  /// Depth values above the encodable range that were clamped.
  std::size_t clamped_depth_values = 0;
};

/// Writes manifest.json, rgb/NNNNNN.png and depth/<source>/NNNNNN.png.
/// The output is canonical: saving a loaded session reproduces the bytes.
SaveStats save_session(const Session& session, const std::filesystem::path& dir);

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

PointCloud load_pointcloud_ply(const std::filesystem::path& path);
void save_pointcloud_ply(const PointCloud& cloud, const std::filesystem::path& path,
                         PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);

SurfaceMesh load_mesh_ply(const std::filesystem::path& path);
void save_mesh_ply(const SurfaceMesh& mesh, const std::filesystem::path& path,
                   PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);

}  // namespace sparsear

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/geometry.hpp"

namespace sparsear {

/// Soft checkerboard plus smooth value noise, evaluated in face-plane meters.
struct FaceTexture {
  double checker_size = 0.25;
  Rgb8 color_a{200, 200, 200};
  Rgb8 color_b{60, 60, 60};
  /// Peak noise offset in intensity levels.
  double noise_amplitude = 40.0;
  /// Lattice spacing of the coarsest noise octave, meters.
  double noise_scale = 0.1;
  /// Each further octave halves the spacing and the amplitude.
  int noise_octaves = 4;
  /// Slope of the checker edge; larger is sharper.
  double edge_sharpness = 2.0;
  std::uint64_t seed = 1;
};

/// Faces in order: x = 0, x = X, y = 0, y = Y, z = 0 (floor), z = Z.
enum class BoxFace { kXMin, kXMax, kYMin, kYMax, kZMin, kZMax };

/// Axis-aligned room [0, X] x [0, Y] x [0, Z] placed in the world by
/// `placement` (box frame to world).
struct BoxScene {
  Vec3 extents{4.0, 3.0, 2.5};
  std::array<FaceTexture, 6> faces;
  PoseSE3 placement;

  /// Room with distinct colors and seeds per face.
  static BoxScene room(const Vec3& extents = Vec3(4.0, 3.0, 2.5));

  void validate() const;
  /// Signed distance in the box frame; negative inside.
  double sdf_box(const Vec3& p) const;
  /// Signed distance of a world point.
  double sdf(const Vec3& world) const { return sdf_box(placement.inverse().apply(world)); }
  bool strictly_inside(const Vec3& world) const;
  Rgb8 shade(BoxFace face, const Vec3& box_point) const;
  double total_area() const;
};

struct RenderedView {
  RgbImage rgb;
  DepthMap depth;
};

/// Casts one ray per pixel center; depth is camera z. Throws
/// InvalidInputError unless the camera is strictly inside the room.
RenderedView render_frame(const BoxScene& scene, const PoseSE3& pose, const Intrinsics& k,
                          int jobs = 1);

struct LinearMotion {
  double velocity = 0.05;  // meters per frame
  Vec3 direction = Vec3::UnitX();  // world frame
};

/// Horizontal circle: the camera turns about the world z axis through a
/// center `radius` behind it, so its heading follows the yaw.
struct OrbitMotion {
  double angular_rate = 0.02;  // radians per frame
  double radius = 0.3;
};

struct ScriptedMotion {
  std::vector<PoseSE3> poses;
};

struct TrajectorySpec {
  std::variant<LinearMotion, OrbitMotion, ScriptedMotion> motion;
  /// Ignored for scripted motion, which uses its pose count.
  int frames = 100;
  PoseSE3 start;
};

std::vector<PoseSE3> generate_poses(const TrajectorySpec& spec);

/// Camera at `eye` with heading `yaw` about world z (0 faces +x) and
/// `pitch` (positive looks up).
PoseSE3 yaw_pitch_pose(const Vec3& eye, double yaw, double pitch = 0.0);

/// Static views from the room center, each held for `frames_per_view`
/// frames: eight around the horizon at two pitches, four level ones, plus
/// floor and ceiling. Together they see every face.
std::vector<PoseSE3> coverage_poses(const BoxScene& scene, int frames_per_view);

struct NoiseSpec {
  double sigma = 0.02;   // meters
  double dropout = 0.1;  // fraction of pixels zeroed
  std::uint64_t seed = 42;
};

struct GenerateOptions {
  double fps = 60.0;
  /// Adds a "noisy" depth source derived from "gt".
  std::optional<NoiseSpec> noise;
  int jobs = 1;
};

/// Gaussian noise and dropout applied to a depth map, seeded per frame.
DepthMap degrade_depth(const DepthMap& depth, const NoiseSpec& noise, std::int64_t frame_index);

Session generate_session(const BoxScene& scene, const TrajectorySpec& traj, const Intrinsics& k,
                         const GenerateOptions& options = {});

/// round(total area * density) points stratified over the six faces.
PointCloud scene_ground_truth_cloud(const BoxScene& scene, double samples_per_m2);

/// Largest stratum diagonal used by scene_ground_truth_cloud.
double ground_truth_stratum_diagonal(const BoxScene& scene, double samples_per_m2);

}  // namespace sparsear

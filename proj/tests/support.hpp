#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "sparsear/dataset.hpp"
#include "sparsear/geometry.hpp"
#include "sparsear/synth.hpp"

namespace sparsear::test {

/// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sparsear_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline Intrinsics small_intrinsics(int w = 64, int h = 48, double f = 60.0) {
  return Intrinsics(f, f, (w - 1) / 2.0, (h - 1) / 2.0, w, h);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline PoseSE3 random_pose(std::mt19937_64& rng, double max_angle = 3.0, double max_t = 5.0) {
  std::uniform_real_distribution<double> a(0.0, max_angle), t(-max_t, max_t);
  return PoseSE3(axis_angle(random_unit(rng), a(rng)), Vec3(t(rng), t(rng), t(rng)));
}

/// Frame looking at a fronto-parallel plane at `depth`, textured with a
/// smooth pattern so shifts are visible.
inline Frame plane_frame(const Intrinsics& k, double depth, const PoseSE3& pose = {}) {
  Frame f;
  f.rgb = RgbImage(k.width, k.height);
  DepthMap d(k.width, k.height, depth);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      f.rgb.at(x, y) = Rgb8{static_cast<std::uint8_t>((x * 7) % 256),
                            static_cast<std::uint8_t>((y * 11) % 256),
                            static_cast<std::uint8_t>((x * y) % 256)};
    }
  }
  f.depth_sources.emplace("gt", std::move(d));
  f.pose = pose;
  return f;
}

/// The constant-velocity box-room session used across tests and the
/// acceptance run: 0.05 m/frame along +x from (0.5, 1, 1.4), heading 45 deg.
inline TrajectorySpec forward_trajectory(int frames = 56) {
  TrajectorySpec t;
  t.motion = LinearMotion{0.05, Vec3::UnitX()};
  t.frames = frames;
  t.start = yaw_pitch_pose(Vec3(0.5, 1.0, 1.4), 45.0 * 3.14159265358979323846 / 180.0);
  return t;
}

inline Intrinsics forward_intrinsics() { return Intrinsics(120, 120, 79.5, 59.5, 160, 120); }

inline Session forward_session(int frames = 56, bool noisy = false, int jobs = 1) {
  GenerateOptions o;
  if (noisy) o.noise = NoiseSpec{0.02, 0.1, 42};
  o.jobs = jobs;
  return generate_session(BoxScene::room(), forward_trajectory(frames), forward_intrinsics(), o);
}

}  // namespace sparsear::test

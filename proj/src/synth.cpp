#include "sparsear/synth.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sparsear/error.hpp"
#include "sparsear/parallel.hpp"

namespace sparsear {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash3(std::uint64_t seed, std::int64_t a, std::int64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(a)) ^
                  static_cast<std::uint64_t>(b));
}

/// Uniform in [0, 1) from the top 53 bits.
double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  return 2.0 * unit(hash3(seed, ix, iy)) - 1.0;
}

double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double sx = smooth(x - fx);
  const double sy = smooth(y - fy);
  const double top = lattice(seed, ix, iy) + sx * (lattice(seed, ix + 1, iy) - lattice(seed, ix, iy));
  const double bottom =
      lattice(seed, ix, iy + 1) + sx * (lattice(seed, ix + 1, iy + 1) - lattice(seed, ix, iy + 1));
  return top + sy * (bottom - top);
}

/// The two in-plane coordinates of a face.
std::pair<int, int> face_axes(BoxFace face) {
  switch (face) {
    case BoxFace::kXMin:
    case BoxFace::kXMax:
      return {1, 2};
    case BoxFace::kYMin:
    case BoxFace::kYMax:
      return {0, 2};
    default:
      return {0, 1};
  }
}

int face_normal_axis(BoxFace face) { return static_cast<int>(face) / 2; }
bool face_is_max(BoxFace face) { return static_cast<int>(face) % 2 == 1; }

Mat3 rot_z(double a) { return axis_angle(Vec3::UnitZ(), a); }

}  // namespace

BoxScene BoxScene::room(const Vec3& extents) {
  BoxScene scene;
  scene.extents = extents;
  const std::array<std::pair<Rgb8, Rgb8>, 6> palette{{
      {{210, 180, 140}, {90, 60, 40}},
      {{180, 200, 230}, {40, 60, 110}},
      {{200, 220, 170}, {50, 90, 40}},
      {{230, 190, 200}, {110, 40, 60}},
      {{190, 190, 190}, {70, 70, 70}},
      {{240, 230, 200}, {120, 110, 80}},
  }};
  for (std::size_t f = 0; f < 6; ++f) {
    scene.faces[f].color_a = palette[f].first;
    scene.faces[f].color_b = palette[f].second;
    scene.faces[f].seed = 101 + f;
  }
  return scene;
}

void BoxScene::validate() const {
  if (!(extents.array() > 0.0).all() || !extents.allFinite()) {
    throw InvalidInputError("box scene: extents must be positive");
  }
  for (const auto& f : faces) {
    if (!(f.checker_size > 0.0) || !(f.noise_scale > 0.0) || !(f.edge_sharpness > 0.0) ||
        !(f.noise_amplitude >= 0.0) || f.noise_octaves < 0) {
      throw InvalidInputError("box scene: invalid texture parameters");
    }
  }
}

double BoxScene::sdf_box(const Vec3& p) const {
  const Vec3 half = 0.5 * extents;
  const Vec3 q = (p - half).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

bool BoxScene::strictly_inside(const Vec3& world) const {
  const Vec3 p = placement.inverse().apply(world);
  return (p.array() > 0.0).all() && (p.array() < extents.array()).all();
}

Rgb8 BoxScene::shade(BoxFace face, const Vec3& box_point) const {
  const FaceTexture& tex = faces[static_cast<std::size_t>(face)];
  const auto [ia, ib] = face_axes(face);
  const double s = box_point[ia];
  const double t = box_point[ib];
  const double pi = std::numbers::pi;
  const double f = std::sin(pi * s / tex.checker_size) * std::sin(pi * t / tex.checker_size);
  const double w = 0.5 + 0.5 * std::tanh(tex.edge_sharpness * f);
  double n = 0.0;
  double amplitude = tex.noise_amplitude;
  double scale = tex.noise_scale;
  for (int o = 0; o < tex.noise_octaves; ++o) {
    n += amplitude * value_noise(tex.seed + 977 * static_cast<std::uint64_t>(o), s / scale, t / scale);
    amplitude *= 0.5;
    scale *= 0.5;
  }
  Rgb8 out{};
  for (int c = 0; c < 3; ++c) {
    const double v = tex.color_a[c] + w * (tex.color_b[c] - tex.color_a[c]) + n;
    out[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
  return out;
}

double BoxScene::total_area() const {
  return 2.0 * (extents.x() * extents.y() + extents.x() * extents.z() + extents.y() * extents.z());
}

RenderedView render_frame(const BoxScene& scene, const PoseSE3& pose, const Intrinsics& k,
                          int jobs) {
  scene.validate();
  if (!scene.strictly_inside(pose.translation())) {
    throw InvalidInputError("render_frame: camera is not strictly inside the room");
  }
  const PoseSE3 cam = scene.placement.inverse() * pose;
  const Mat3& r = cam.rotation();
  const Vec3& o = cam.translation();
  RenderedView view{RgbImage(k.width, k.height), DepthMap(k.width, k.height)};
  parallel_for(static_cast<std::size_t>(k.height), jobs, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < k.width; ++x) {
      // z component 1, so the ray parameter is the z-depth.
      const Vec3 dc((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const Vec3 d = r * dc;
      double best = std::numeric_limits<double>::infinity();
      BoxFace face = BoxFace::kXMin;
      for (int a = 0; a < 3; ++a) {
        if (d[a] > 0.0) {
          const double s = (scene.extents[a] - o[a]) / d[a];
          if (s < best) {
            best = s;
            face = static_cast<BoxFace>(2 * a + 1);
          }
        } else if (d[a] < 0.0) {
          const double s = -o[a] / d[a];
          if (s < best) {
            best = s;
            face = static_cast<BoxFace>(2 * a);
          }
        }
      }
      Vec3 hit = o + best * d;
      hit[face_normal_axis(face)] = face_is_max(face) ? scene.extents[face_normal_axis(face)] : 0.0;
      view.depth.at(x, y) = best;
      view.rgb.at(x, y) = scene.shade(face, hit);
    }
  });
  return view;
}

PoseSE3 yaw_pitch_pose(const Vec3& eye, double yaw, double pitch) {
  Mat3 base;
  // Columns: camera x (right), y (down), z (forward) for a level camera facing +x.
  base << 0, 0, 1,
          -1, 0, 0,
          0, -1, 0;
  const Mat3 r = rot_z(yaw) * axis_angle(Vec3::UnitY(), -pitch) * base;
  // Rodrigues output can drift by an ulp; re-orthonormalize.
  const Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return PoseSE3(svd.matrixU() * svd.matrixV().transpose(), eye);
}

std::vector<PoseSE3> generate_poses(const TrajectorySpec& spec) {
  if (const auto* s = std::get_if<ScriptedMotion>(&spec.motion)) {
    if (s->poses.empty()) throw InvalidInputError("trajectory: scripted motion has no poses");
    return s->poses;
  }
  if (spec.frames < 1) throw InvalidInputError("trajectory: frame count must be >= 1");
  std::vector<PoseSE3> poses;
  poses.reserve(static_cast<std::size_t>(spec.frames));
  const Mat3& r0 = spec.start.rotation();
  const Vec3& t0 = spec.start.translation();
  if (const auto* lin = std::get_if<LinearMotion>(&spec.motion)) {
    if (!(lin->direction.norm() > 0.0) || !std::isfinite(lin->velocity)) {
      throw InvalidInputError("trajectory: linear motion needs a nonzero direction");
    }
    const Vec3 dir = lin->direction.normalized();
    for (int i = 0; i < spec.frames; ++i) poses.emplace_back(r0, t0 + (i * lin->velocity) * dir);
    return poses;
  }
  const auto& orbit = std::get<OrbitMotion>(spec.motion);
  if (!(orbit.radius >= 0.0) || !std::isfinite(orbit.angular_rate)) {
    throw InvalidInputError("trajectory: orbit radius must be nonnegative");
  }
  Vec3 heading(r0(0, 2), r0(1, 2), 0.0);
  heading = heading.norm() > 1e-12 ? heading.normalized() : Vec3::UnitX();
  const Vec3 center = t0 - orbit.radius * heading;
  for (int i = 0; i < spec.frames; ++i) {
    const Mat3 rz = rot_z(i * orbit.angular_rate);
    const Eigen::JacobiSVD<Mat3> svd(rz * r0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    poses.emplace_back(svd.matrixU() * svd.matrixV().transpose(), center + rz * (t0 - center));
  }
  return poses;
}

std::vector<PoseSE3> coverage_poses(const BoxScene& scene, int frames_per_view) {
  if (frames_per_view < 1) throw InvalidInputError("coverage: frames_per_view must be >= 1");
  const Vec3 eye = scene.placement.apply(0.5 * scene.extents);
  const double yaw0 = std::atan2(scene.placement.rotation()(1, 0), scene.placement.rotation()(0, 0));
  const double q = std::numbers::pi / 2.0;
  std::vector<std::pair<double, double>> views;
  for (int i = 0; i < 4; ++i) views.emplace_back(i * q, 0.0);
  for (int i = 0; i < 4; ++i) views.emplace_back(q / 2 + i * q, -0.6);
  for (int i = 0; i < 4; ++i) views.emplace_back(q / 2 + i * q, 0.6);
  views.emplace_back(0.0, -q);
  views.emplace_back(0.0, q);
  std::vector<PoseSE3> poses;
  for (const auto& [yaw, pitch] : views) {
    const PoseSE3 p = yaw_pitch_pose(eye, yaw0 + yaw, pitch);
    for (int i = 0; i < frames_per_view; ++i) poses.push_back(p);
  }
  return poses;
}

DepthMap degrade_depth(const DepthMap& depth, const NoiseSpec& noise, std::int64_t frame_index) {
  if (!(noise.sigma >= 0.0) || !(noise.dropout >= 0.0 && noise.dropout <= 1.0)) {
    throw InvalidInputError("noise: sigma must be >= 0 and dropout in [0, 1]");
  }
  std::mt19937_64 rng(splitmix(noise.seed ^ splitmix(static_cast<std::uint64_t>(frame_index))));
  DepthMap out = depth;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double drop = unit(rng());
    const double u1 = 1.0 - unit(rng());
    const double u2 = unit(rng());
    const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (!(out[i] > 0.0)) continue;
    out[i] = drop < noise.dropout ? 0.0 : std::max(out[i] + noise.sigma * g, 0.0);
  }
  return out;
}

Session generate_session(const BoxScene& scene, const TrajectorySpec& traj, const Intrinsics& k,
                         const GenerateOptions& options) {
  if (!(options.fps > 0.0)) throw InvalidInputError("generate_session: fps must be positive");
  const auto poses = generate_poses(traj);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!scene.strictly_inside(poses[i].translation())) {
      throw InvalidInputError("generate_session: pose " + std::to_string(i) + " leaves the room");
    }
  }
  Session session{k, options.fps, std::vector<Frame>(poses.size())};
  parallel_for(poses.size(), options.jobs, [&](std::size_t i) {
    Frame& f = session.frames[i];
    f.index = static_cast<std::int64_t>(i);
    f.timestamp_us = std::llround(static_cast<double>(i) * 1e6 / options.fps);
    f.pose = poses[i];
    RenderedView view = render_frame(scene, poses[i], k);
    f.rgb = std::move(view.rgb);
    if (options.noise) f.depth_sources["noisy"] = degrade_depth(view.depth, *options.noise, f.index);
    f.depth_sources["gt"] = std::move(view.depth);
  });
  validate_session(session);
  return session;
}

namespace {

struct FaceLayout {
  BoxFace face;
  double a = 0.0;  // extent along the first in-plane axis
  double b = 0.0;
  std::size_t count = 0;
  std::size_t rows = 0;
};

std::vector<FaceLayout> layout_faces(const BoxScene& scene, double density) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw InvalidInputError("ground truth cloud: density must be positive");
  }
  scene.validate();
  std::vector<FaceLayout> faces;
  for (int f = 0; f < 6; ++f) {
    const auto face = static_cast<BoxFace>(f);
    const auto [ia, ib] = face_axes(face);
    faces.push_back({face, scene.extents[ia], scene.extents[ib], 0, 0});
  }
  const auto total = static_cast<std::size_t>(std::llround(scene.total_area() * density));
  // Largest-remainder apportionment, ties to the lower face index.
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int f = 0; f < 6; ++f) {
    const double share = faces[f].a * faces[f].b / scene.total_area() * static_cast<double>(total);
    faces[f].count = static_cast<std::size_t>(std::floor(share));
    assigned += faces[f].count;
    remainders.emplace_back(share - std::floor(share), f);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) faces[remainders[i % 6].second].count++;
  for (auto& f : faces) {
    if (f.count == 0) continue;
    const auto rows = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(f.count) * f.b / f.a)));
    f.rows = std::clamp<std::size_t>(rows, 1, f.count);
  }
  return faces;
}

}  // namespace

PointCloud scene_ground_truth_cloud(const BoxScene& scene, double samples_per_m2) {
  PointCloud cloud;
  for (const auto& f : layout_faces(scene, samples_per_m2)) {
    if (f.count == 0) continue;
    const auto [ia, ib] = face_axes(f.face);
    const int axis = face_normal_axis(f.face);
    const auto seed = 7000 + static_cast<std::uint64_t>(f.face);
    for (std::size_t j = 0; j < f.rows; ++j) {
      const std::size_t per_row = f.count / f.rows + (j < f.count % f.rows ? 1 : 0);
      for (std::size_t i = 0; i < per_row; ++i) {
        const std::uint64_t h = hash3(seed, static_cast<std::int64_t>(j), static_cast<std::int64_t>(i));
        Vec3 p;
        p[axis] = face_is_max(f.face) ? scene.extents[axis] : 0.0;
        p[ia] = (static_cast<double>(i) + unit(h)) * f.a / static_cast<double>(per_row);
        p[ib] = (static_cast<double>(j) + unit(splitmix(h))) * f.b / static_cast<double>(f.rows);
        cloud.points.push_back(scene.placement.apply(p));
        cloud.colors.push_back(scene.shade(f.face, p));
      }
    }
  }
  return cloud;
}

double ground_truth_stratum_diagonal(const BoxScene& scene, double samples_per_m2) {
  double worst = 0.0;
  for (const auto& f : layout_faces(scene, samples_per_m2)) {
    if (f.count == 0) continue;
    const std::size_t min_per_row = f.count / f.rows;
    const double w = f.a / static_cast<double>(min_per_row);
    const double h = f.b / static_cast<double>(f.rows);
    worst = std::max(worst, std::hypot(w, h));
  }
  return worst;
}

}  // namespace sparsear

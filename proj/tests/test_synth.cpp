#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "sparsear/error.hpp"
#include "sparsear/kdtree.hpp"
#include "sparsear/synth.hpp"
#include "support.hpp"

using namespace sparsear;

TEST_CASE("box scene basics") {
  const BoxScene room = BoxScene::room();
  CHECK(room.total_area() == doctest::Approx(2 * (4 * 3 + 4 * 2.5 + 3 * 2.5)));
  CHECK(room.sdf(Vec3(2, 1.5, 1.25)) == doctest::Approx(-1.25));
  CHECK(room.sdf(Vec3(5, 1.5, 1.25)) == doctest::Approx(1.0));
  CHECK(room.sdf(Vec3(4, 1, 1)) == 0.0);
  CHECK(room.strictly_inside(Vec3(0.5, 0.5, 0.5)));
  CHECK_FALSE(room.strictly_inside(Vec3(0, 0.5, 0.5)));
  BoxScene bad = room;
  bad.extents.x() = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
  bad = room;
  bad.faces[2].checker_size = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
}

TEST_CASE("fronto-parallel wall depth is exact") {
  const BoxScene room = BoxScene::room();
  const Intrinsics k(50, 50, 20, 15, 41, 31);
  const PoseSE3 pose = yaw_pitch_pose(Vec3(1.0, 1.5, 1.25), 0.0);
  const RenderedView v = render_frame(room, pose, k);
  CHECK(v.depth.at(20, 15) == 3.0);
  // Every ray of this narrow view meets the x = 4 wall, at camera z = 3.
  for (double d : v.depth.values()) CHECK(std::abs(d - 3.0) < 1e-12);
  CHECK_THROWS_AS(render_frame(room, yaw_pitch_pose(Vec3(5, 1, 1), 0.0), k), InvalidInputError);
}

TEST_CASE("rendered points lie on the room surface") {
  const BoxScene room = BoxScene::room();
  const Intrinsics k(60, 60, 39.5, 29.5, 80, 60);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 0.7), yaw(-3.1, 3.1), pitch(-1.2, 1.2);
  for (int t = 0; t < 6; ++t) {
    const Vec3 eye(4 * u(rng), 3 * u(rng), 2.5 * u(rng));
    const PoseSE3 pose = yaw_pitch_pose(eye, yaw(rng), pitch(rng));
    const RenderedView v = render_frame(room, pose, k, 2);
    for (int y = 0; y < k.height; ++y) {
      for (int x = 0; x < k.width; ++x) {
        REQUIRE(v.depth.at(x, y) > 0.0);
        const Vec3 p = pose.apply(unproject({double(x), double(y)}, v.depth.at(x, y), k));
        CHECK(std::abs(room.sdf(p)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("rendering is equivariant under scene placement") {
  BoxScene moved = BoxScene::room();
  const PoseSE3 placement(axis_angle(Vec3(0.2, -0.4, 1.0), 0.7), Vec3(3.0, -1.0, 0.5));
  moved.placement = placement;
  const Intrinsics k(60, 60, 39.5, 29.5, 80, 60);
  const PoseSE3 pose = yaw_pitch_pose(Vec3(1.2, 0.9, 1.1), 0.4, 0.2);
  const RenderedView a = render_frame(BoxScene::room(), pose, k);
  const RenderedView b = render_frame(moved, placement * pose, k);
  std::size_t color_diff = 0;
  for (std::size_t i = 0; i < a.depth.size(); ++i) {
    CHECK(std::abs(a.depth[i] - b.depth[i]) < 1e-9);
    for (int c = 0; c < 3; ++c) color_diff += std::abs(int(a.rgb[i][c]) - int(b.rgb[i][c])) > 1;
  }
  CHECK(color_diff == 0);
}

TEST_CASE("trajectories") {
  SUBCASE("linear motion steps 0.05 per frame") {
    const auto poses = generate_poses(test::forward_trajectory(100));
    REQUIRE(poses.size() == 100);
    for (std::size_t i = 1; i < poses.size(); ++i) {
      CHECK(std::abs(se3_geodesic(poses[i - 1], poses[i]) - 0.05) < 1e-12);
    }
  }
  SUBCASE("orbit keeps the heading tangent to a circle") {
    TrajectorySpec t;
    t.motion = OrbitMotion{0.02, 0.3};
    t.frames = 50;
    t.start = yaw_pitch_pose(Vec3(2, 1.5, 1.2), 0.3);
    const auto poses = generate_poses(t);
    const double chord = 2 * 0.3 * std::sin(0.01);
    for (std::size_t i = 1; i < poses.size(); ++i) {
      CHECK(std::abs(se3_geodesic(poses[i - 1], poses[i]) - std::hypot(0.02, chord)) < 1e-9);
      CHECK(poses[i].translation().z() == doctest::Approx(1.2));
    }
  }
  SUBCASE("scripted poses pass through") {
    std::mt19937_64 rng(2);
    ScriptedMotion m{{test::random_pose(rng), test::random_pose(rng)}};
    TrajectorySpec t;
    t.motion = m;
    const auto poses = generate_poses(t);
    REQUIRE(poses.size() == 2);
    CHECK(poses[1].matrix() == m.poses[1].matrix());
  }
  SUBCASE("coverage views see every face") {
    const BoxScene room = BoxScene::room();
    const auto poses = coverage_poses(room, 3);
    CHECK(poses.size() == 14u * 3);
    const Intrinsics k(40, 40, 39.5 / 2, 39.5 / 2, 40, 40);
    std::array<int, 6> hits{};
    for (std::size_t v = 0; v < poses.size(); v += 3) {
      const RenderedView r = render_frame(room, poses[v], k);
      for (std::size_t i = 0; i < r.depth.size(); ++i) {
        const Vec3 p = poses[v].apply(unproject({double(i % 40), double(i / 40)}, r.depth[i], k));
        for (int a = 0; a < 3; ++a) {
          if (std::abs(p[a]) < 1e-9) ++hits[2 * a];
          if (std::abs(p[a] - room.extents[a]) < 1e-9) ++hits[2 * a + 1];
        }
      }
    }
    for (int h : hits) CHECK(h > 0);
  }
  SUBCASE("yaw and pitch") {
    const PoseSE3 p = yaw_pitch_pose(Vec3::Zero(), std::numbers::pi / 2, 0.3);
    CHECK(p.rotation().col(2).isApprox(Vec3(0, std::cos(0.3), std::sin(0.3)), 1e-12));
    CHECK(p.rotation().col(0).isApprox(Vec3(1, 0, 0), 1e-12));
  }
}

TEST_CASE("generated sessions") {
  SUBCASE("single frame") {
    const Session s = test::forward_session(1);
    CHECK(s.size() == 1);
    CHECK_NOTHROW(validate_session(s));
  }
  SUBCASE("deterministic, including noise, across thread counts") {
    const Session a = test::forward_session(4, true, 1);
    const Session b = test::forward_session(4, true, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.frames[i].rgb == b.frames[i].rgb);
      CHECK(a.frames[i].depth_sources == b.frames[i].depth_sources);
      CHECK(a.frames[i].timestamp_us == std::llround(i * 1e6 / 60.0));
    }
    CHECK(a.depth_source_names() == std::vector<std::string>{"gt", "noisy"});
  }
  SUBCASE("leaving the room is rejected") {
    CHECK_THROWS_AS(test::forward_session(80), InvalidInputError);
  }
}

TEST_CASE("depth degradation statistics") {
  DepthMap d(200, 200, 2.0);
  const DepthMap n = degrade_depth(d, {0.02, 0.1, 42}, 5);
  CHECK(n == degrade_depth(d, {0.02, 0.1, 42}, 5));
  CHECK_FALSE(n == degrade_depth(d, {0.02, 0.1, 42}, 6));
  std::size_t dropped = 0;
  double sum = 0, sq = 0;
  for (double v : n.values()) {
    if (v == 0.0) {
      ++dropped;
      continue;
    }
    sum += v - 2.0;
    sq += (v - 2.0) * (v - 2.0);
  }
  const double kept = static_cast<double>(n.size() - dropped);
  CHECK(dropped / double(n.size()) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(std::abs(sum / kept) < 0.001);
  CHECK(std::sqrt(sq / kept) == doctest::Approx(0.02).epsilon(0.03));
  CHECK(degrade_depth(DepthMap(4, 4, 0.0), {0.02, 0.1, 1}, 0) == DepthMap(4, 4, 0.0));
  CHECK_THROWS_AS(degrade_depth(d, {0.02, 1.5, 1}, 0), InvalidInputError);
}

TEST_CASE("ground-truth cloud covers the surface within the stratum bound") {
  const BoxScene room = BoxScene::room();
  const double density = 2000;
  const PointCloud gt = scene_ground_truth_cloud(room, density);
  CHECK(gt.size() == static_cast<std::size_t>(std::llround(room.total_area() * density)));
  for (const auto& p : gt.points) CHECK(std::abs(room.sdf(p)) <= 1e-12);
  CHECK(gt.points == scene_ground_truth_cloud(room, density).points);

  const double bound = ground_truth_stratum_diagonal(room, density);
  CHECK(bound < 0.1);
  const KdTree tree(gt.points);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 20000; ++i) {
    const int face = static_cast<int>(u(rng) * 6);
    Vec3 p(u(rng) * 4, u(rng) * 3, u(rng) * 2.5);
    p[face / 2] = face % 2 ? room.extents[face / 2] : 0.0;
    worst = std::max(worst, std::sqrt(tree.nearest(p).squared_distance));
  }
  CHECK(worst <= bound);
}

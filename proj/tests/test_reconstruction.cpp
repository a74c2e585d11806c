#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "sparsear/error.hpp"
#include "sparsear/metrics.hpp"
#include "sparsear/reconstruction.hpp"
#include "support.hpp"

using namespace sparsear;

namespace {

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
    c.colors.push_back({static_cast<std::uint8_t>(i % 256), 0, 0});
  }
  return c;
}

/// Three orthogonal planes with some relief: well conditioned for ICP.
PointCloud corner_cloud(std::mt19937_64& rng, std::size_t per_face = 400) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c;
  for (std::size_t i = 0; i < per_face; ++i) {
    const double a = u(rng), b = u(rng);
    c.points.emplace_back(a, b, 0.05 * std::sin(6 * a));
    c.points.emplace_back(a, 0.05 * std::sin(5 * b), b);
    c.points.emplace_back(0.05 * std::sin(4 * a * b), a, b);
  }
  return c;
}

PointCloud transformed(const PointCloud& c, const RelativeTransform& t) {
  PointCloud out = c;
  for (auto& p : out.points) p = t.apply(p);
  return out;
}

std::vector<Vec3> sorted_points(std::vector<Vec3> p) {
  std::sort(p.begin(), p.end(), [](const Vec3& a, const Vec3& b) {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
  });
  return p;
}

double transform_error(const RelativeTransform& a, const RelativeTransform& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("frame lifting") {
  const Intrinsics k = test::small_intrinsics(20, 16, 25.0);
  Frame f = test::plane_frame(k, 2.0);
  f.depth_sources["gt"].at(3, 4) = 0.0;
  const PointCloud c = frame_to_pointcloud(f, "gt", k);
  CHECK(c.size() == k.pixel_count() - 1);
  for (const auto& p : c.points) CHECK(std::abs(p.z() - 2.0) <= 1e-9);
  CHECK(c.colors[0] == f.rgb.at(0, 0));
  CHECK(frame_to_pointcloud(f, "gt", k, 4).size() == 5u * 4);
  CHECK_THROWS_AS(frame_to_pointcloud(f, "gt", k, 0), InvalidInputError);
  CHECK_THROWS_AS(frame_to_pointcloud(f, "lidar", k), UnknownDepthSourceError);
  CHECK_THROWS_AS(frame_to_pointcloud(f, "gt", test::small_intrinsics(10, 10, 25.0)),
                  DimensionMismatchError);

  const Session s = test::forward_session(3);
  const BoxScene scene = BoxScene::room();
  for (const auto& frame : s.frames) {
    for (const auto& p : frame_to_pointcloud(frame, "gt", s.intrinsics, 2).points) {
      CHECK(std::abs(scene.sdf(p)) <= 1e-3);
    }
  }
}

TEST_CASE("voxel fusion against a map-based oracle") {
  std::mt19937_64 rng(5);
  const PointCloud c = random_cloud(3000, rng);
  for (double voxel : {0.01, 0.05, 0.2}) {
    std::map<std::tuple<long, long, long>, std::pair<Vec3, int>> cells;
    for (const auto& p : c.points) {
      auto& cell = cells[{std::lround(std::floor(p.x() / voxel)), std::lround(std::floor(p.y() / voxel)),
                          std::lround(std::floor(p.z() / voxel))}];
      if (cell.second == 0) cell.first.setZero();
      cell.first += p;
      ++cell.second;
    }
    const PointCloud fused = voxel_fuse(c, voxel);
    REQUIRE(fused.size() == cells.size());
    std::vector<Vec3> expected;
    for (const auto& [key, cell] : cells) expected.push_back(cell.first / cell.second);
    const auto got = sorted_points(fused.points);
    expected = sorted_points(expected);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK((got[i] - expected[i]).norm() < 1e-12);
  }
}

TEST_CASE("voxel fusion properties") {
  std::mt19937_64 rng(6);
  const PointCloud c = random_cloud(2000, rng);
  SUBCASE("input order does not matter, bit for bit") {
    PointCloud shuffled = c;
    std::vector<std::size_t> order(c.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      shuffled.points[i] = c.points[order[i]];
      shuffled.colors[i] = c.colors[order[i]];
    }
    CHECK(voxel_fuse(shuffled, 0.1).points == voxel_fuse(c, 0.1).points);
  }
  SUBCASE("count is non-increasing in voxel size") {
    std::size_t last = c.size();
    for (double v = 0.005; v < 1.2; v *= 1.3) {
      const std::size_t n = voxel_fuse(c, v).size();
      CHECK(n <= last);
      last = n;
    }
  }
  SUBCASE("singleton voxels keep the original points") {
    const PointCloud fused = voxel_fuse(c, 1e-4);
    CHECK(fused.size() == c.size());
    CHECK(sorted_points(fused.points) == sorted_points(c.points));
  }
  SUBCASE("fusing a cloud with itself gives its occupied voxel count") {
    const MergeResult m = merge_clouds({c, c}, FusedMerge{0.02});
    CHECK(m.cloud.size() == voxel_fuse(c, 0.02).size());
  }
  CHECK_THROWS_AS(voxel_fuse(c, 0.0), InvalidInputError);
}

TEST_CASE("merge methods on simple inputs") {
  std::mt19937_64 rng(7);
  const PointCloud a = random_cloud(100, rng), b = random_cloud(50, rng);
  const MergeResult concat = merge_clouds({a, b}, ConcatMerge{});
  CHECK(concat.cloud.size() == 150);
  CHECK(std::equal(a.points.begin(), a.points.end(), concat.cloud.points.begin()));
  CHECK(std::equal(b.points.begin(), b.points.end(), concat.cloud.points.begin() + 100));
  CHECK(merge_method_name(ConcatMerge{}) == "concat");
  CHECK(merge_method_name(FusedMerge{}) == "fused");
  CHECK(merge_method_name(FusedIcpMerge{}) == "fused_icp");
  for (const MergeMethod& m : {MergeMethod{ConcatMerge{}}, MergeMethod{FusedMerge{1e-4}},
                               MergeMethod{FusedIcpMerge{1e-4, {}}}}) {
    CHECK(sorted_points(merge_clouds({a}, m).cloud.points) == sorted_points(a.points));
  }
}

TEST_CASE("best-fit transform is exact on noiseless correspondences") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const PointCloud c = random_cloud(50, rng);
    const RelativeTransform truth(axis_angle(test::random_unit(rng), 2.0 * t / 20), test::random_unit(rng));
    const RelativeTransform fit = best_fit_transform(c.points, transformed(c, truth).points);
    CHECK(transform_error(fit, truth) < 1e-12);
  }
  // Planar input must not come back as a reflection.
  std::vector<Vec3> planar{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  CHECK(best_fit_transform(planar, planar).rotation().determinant() == doctest::Approx(1.0));
}

TEST_CASE("icp") {
  std::mt19937_64 rng(9);
  const PointCloud src = corner_cloud(rng);

  SUBCASE("identical clouds") {
    const IcpResult r = icp_align(src, src);
    CHECK(transform_error(r.transform, RelativeTransform::identity()) < 1e-12);
    CHECK(r.rmse < 1e-12);
    CHECK(r.iterations <= 2);
    CHECK(r.converged);
  }
  SUBCASE("recovers 5 degrees and 5 cm") {
    const RelativeTransform truth(axis_angle(Vec3(1, 2, 0.5), 5 * 3.14159265358979 / 180),
                                  Vec3(0.03, -0.04, 0.0));
    const IcpResult r = icp_align(src, transformed(src, truth), RelativeTransform::identity(),
                                  {100, 0.2, 1e-10, 1e-10});
    CHECK(transform_error(r.transform, truth) < 1e-6);
    CHECK(r.converged);
  }
  SUBCASE("gated outliers are ignored") {
    const RelativeTransform truth(axis_angle(Vec3(0, 1, 1), 0.05), Vec3(0.02, 0.01, -0.01));
    PointCloud dst = transformed(src, truth);
    PointCloud noisy_src = src;
    std::uniform_real_distribution<double> far(3.0, 4.0);
    for (std::size_t i = 0; i < src.size() / 10; ++i) noisy_src.points.emplace_back(far(rng), far(rng), far(rng));
    const IcpResult r = icp_align(noisy_src, dst, RelativeTransform::identity(), {100, 0.2, 1e-10, 1e-10});
    CHECK(transform_error(r.transform, truth) < 1e-3);
    CHECK(r.correspondences <= src.size());
  }
  SUBCASE("degenerate input") {
    PointCloud two{{Vec3(0, 0, 0), Vec3(1, 0, 0)}, {}};
    CHECK_THROWS_AS(icp_align(two, two), DegenerateRegistrationError);
    PointCloud far = transformed(src, RelativeTransform(Mat3::Identity(), Vec3(10, 0, 0)));
    try {
      icp_align(src, far);
      FAIL("expected DegenerateRegistrationError");
    } catch (const DegenerateRegistrationError& e) {
      CHECK(e.iteration() == 1);
    }
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(icp_align(src, src, RelativeTransform::identity(), {0, 0.1, 1e-6, 1e-6}),
                    InvalidInputError);
    CHECK_THROWS_AS(IcpParams({10, -1.0, 1e-6, 1e-6}).validate(), InvalidInputError);
  }
}

TEST_CASE("fused_icp corrects a 1 cm pose error that plain fusion keeps") {
  const Session s = test::forward_session(9);
  const BoxScene scene = BoxScene::room();
  const PointCloud gt = scene_ground_truth_cloud(scene, 20000);
  const PointCloud a = frame_to_pointcloud(s.frames[0], "gt", s.intrinsics, 2);
  PointCloud b = frame_to_pointcloud(s.frames[8], "gt", s.intrinsics, 2);
  for (auto& p : b.points) p += Vec3(0.006, -0.006, 0.0056);  // |offset| = 1 cm
  FusedIcpMerge icp{0.02, {}};
  icp.icp.max_correspondence_distance = 0.05;
  const MergeResult fused = merge_clouds({a, b}, FusedMerge{0.02});
  const MergeResult refined = merge_clouds({a, b}, icp);
  CHECK(refined.skipped.empty());
  const double h_fused = hausdorff(fused.cloud, gt).distance;
  const double h_icp = hausdorff(refined.cloud, gt).distance;
  CHECK(h_icp < h_fused);
}

TEST_CASE("session reconstruction") {
  const Session s = test::forward_session(5);
  ReconstructionOptions o;
  o.frame_stride = 5;
  o.pixel_stride = 2;
  o.method = FusedMerge{0.02};
  const MergeResult one = reconstruct_session(s, "gt", o);
  CHECK(one.cloud.points ==
        voxel_fuse(frame_to_pointcloud(s.frames[0], "gt", s.intrinsics, 2), 0.02).points);
  o.frame_stride = 1;
  o.jobs = 1;
  const MergeResult serial = reconstruct_session(s, "gt", o);
  o.jobs = 4;
  CHECK(reconstruct_session(s, "gt", o).cloud.points == serial.cloud.points);
  o.frame_stride = 0;
  CHECK_THROWS_AS(reconstruct_session(s, "gt", o), InvalidInputError);
}

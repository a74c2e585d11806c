#include "doctest.h"

#include <fstream>
#include <random>

#include "json.hpp"
#include "sparsear/dataset.hpp"
#include "sparsear/error.hpp"
#include "sparsear/png_io.hpp"
#include "sparsear/report.hpp"
#include "support.hpp"

using namespace sparsear;
namespace fs = std::filesystem;

namespace {

Session hand_session(int frames) {
  const Intrinsics k = test::small_intrinsics(16, 12, 20.0);
  Session s{k, 30.0, {}};
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> mm(0, 9000), byte(0, 255);
  for (int i = 0; i < frames; ++i) {
    Frame f;
    f.index = i;
    f.timestamp_us = 1000 + 33333 * i;
    f.pose = test::random_pose(rng);
    f.rgb = RgbImage(k.width, k.height);
    for (auto& c : f.rgb.values()) {
      c = Rgb8{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
               static_cast<std::uint8_t>(byte(rng))};
    }
    for (const char* name : {"gt", "lidar"}) {
      DepthMap d(k.width, k.height);
      for (auto& v : d.values()) v = decode_depth_mm(static_cast<std::uint16_t>(mm(rng)));
      f.depth_sources.emplace(name, std::move(d));
    }
    s.frames.push_back(std::move(f));
  }
  return s;
}

nlohmann::json read_manifest(const fs::path& dir) {
  return nlohmann::json::parse(read_file(dir / "manifest.json"));
}

void write_manifest(const fs::path& dir, const nlohmann::json& m) {
  std::ofstream(dir / "manifest.json", std::ios::trunc) << m.dump(2);
}

}  // namespace

TEST_CASE("depth encoding") {
  CHECK(encode_depth_mm(0.0) == 0);
  CHECK(encode_depth_mm(-1.0) == 0);
  CHECK(encode_depth_mm(std::nan("")) == 0);
  const std::uint16_t v = encode_depth_mm(1.2345);
  CHECK((v == 1234 || v == 1235));
  CHECK(std::abs(decode_depth_mm(v) - 1.2345) <= 0.0005 + 1e-12);
  CHECK(encode_depth_mm(3.7) == 3700);
  bool clamped = false;
  CHECK(encode_depth_mm(65.535, &clamped) == 65535);
  CHECK_FALSE(clamped);
  CHECK(encode_depth_mm(70.0, &clamped) == 65535);
  CHECK(clamped);
}

TEST_CASE("session round trip is bit-identical and canonical") {
  const Session s = hand_session(4);
  test::TempDir a("ds_a"), b("ds_b");
  const SaveStats stats = save_session(s, a.path());
  CHECK(stats.frames_written == 4);
  CHECK(stats.depth_maps_written == 8);
  CHECK(stats.clamped_depth_values == 0);

  const Session loaded = load_session(a.path());
  REQUIRE(loaded.size() == s.size());
  CHECK(loaded.intrinsics == s.intrinsics);
  CHECK(loaded.nominal_fps == s.nominal_fps);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(loaded.frames[i].index == s.frames[i].index);
    CHECK(loaded.frames[i].timestamp_us == s.frames[i].timestamp_us);
    CHECK(loaded.frames[i].rgb == s.frames[i].rgb);
    CHECK(loaded.frames[i].depth_sources == s.frames[i].depth_sources);
    CHECK(loaded.frames[i].pose.matrix() == s.frames[i].pose.matrix());
  }
  CHECK(loaded.depth_source_names() == std::vector<std::string>{"gt", "lidar"});

  save_session(loaded, b.path());
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a.path());
    CHECK_MESSAGE(read_file(entry.path()) == read_file(b.path() / rel), rel.string());
  }
}

TEST_CASE("saved layout has one png per frame and source") {
  const Session s = hand_session(10);
  test::TempDir dir("ds_layout");
  save_session(s, dir.path());
  auto count = [](const fs::path& p) {
    return std::distance(fs::directory_iterator(p), fs::directory_iterator{});
  };
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(count(dir / "rgb") == 10);
  CHECK(count(dir.path() / "depth" / "gt") == 10);
  CHECK(count(dir.path() / "depth" / "lidar") == 10);
  CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));
}

TEST_CASE("save rejects invalid sessions before writing") {
  test::TempDir dir("ds_empty");
  Session empty{test::small_intrinsics(), 60.0, {}};
  CHECK_THROWS_AS(save_session(empty, dir / "out"), InvalidInputError);
  CHECK_FALSE(fs::exists(dir / "out"));

  Session bad = hand_session(2);
  bad.frames[1].timestamp_us = bad.frames[0].timestamp_us;
  CHECK_THROWS_AS(save_session(bad, dir / "out"), TimestampOrderError);
  CHECK_FALSE(fs::exists(dir / "out"));

  Session neg = hand_session(1);
  neg.frames[0].depth_sources["gt"][3] = -1.0;
  CHECK_THROWS_AS(save_session(neg, dir / "out"), InvalidInputError);
}

TEST_CASE("clamped depth is counted") {
  Session s = hand_session(1);
  s.frames[0].depth_sources["gt"][0] = 80.0;
  test::TempDir dir("ds_clamp");
  CHECK(save_session(s, dir.path()).clamped_depth_values == 1);
  CHECK(load_session(dir.path()).frames[0].depth("gt")[0] == 65.535);
}

TEST_CASE("corrupt sessions raise typed errors") {
  test::TempDir dir("ds_corrupt");
  save_session(hand_session(3), dir.path());
  const nlohmann::json good = read_manifest(dir.path());

  SUBCASE("missing manifest") {
    fs::remove(dir / "manifest.json");
    CHECK_THROWS_AS(load_session(dir.path()), MissingFileError);
  }
  SUBCASE("malformed json") {
    std::ofstream(dir / "manifest.json", std::ios::trunc) << "{\"frames\": [";
    CHECK_THROWS_AS(load_session(dir.path()), ManifestError);
  }
  SUBCASE("missing field") {
    nlohmann::json m = good;
    m["frames"][1].erase("timestamp_us");
    write_manifest(dir.path(), m);
    CHECK_THROWS_AS(load_session(dir.path()), ManifestError);
  }
  SUBCASE("non-rigid pose") {
    nlohmann::json m = good;
    m["frames"][0]["pose_c2w"][0] = 2.0;
    write_manifest(dir.path(), m);
    CHECK_THROWS_AS(load_session(dir.path()), ManifestError);
  }
  SUBCASE("absent png names the path") {
    fs::remove(dir.path() / "depth" / "lidar" / "000001.png");
    try {
      load_session(dir.path());
      FAIL("expected MissingFileError");
    } catch (const MissingFileError& e) {
      CHECK(e.path().find("depth/lidar/000001.png") != std::string::npos);
      CHECK(std::string(e.what()).find("000001.png") != std::string::npos);
    }
  }
  SUBCASE("wrong depth dimensions name the frame") {
    png::write_gray16({8, 8, std::vector<std::uint16_t>(64, 1000)},
                      dir.path() / "depth" / "gt" / "000002.png");
    try {
      load_session(dir.path());
      FAIL("expected DimensionMismatchError");
    } catch (const DimensionMismatchError& e) {
      CHECK(e.frame_index() == 2);
      CHECK(std::string(e.what()).find("frame 2") != std::string::npos);
    }
  }
  SUBCASE("non-monotonic timestamps") {
    nlohmann::json m = good;
    m["frames"][2]["timestamp_us"] = m["frames"][1]["timestamp_us"];
    write_manifest(dir.path(), m);
    try {
      load_session(dir.path());
      FAIL("expected TimestampOrderError");
    } catch (const TimestampOrderError& e) {
      CHECK(e.frame_index() == 2);
    }
  }
  SUBCASE("unknown depth source") {
    const Session s = load_session(dir.path());
    CHECK_THROWS_AS(s.frames[0].depth("fm"), UnknownDepthSourceError);
  }
}

TEST_CASE("point cloud ply") {
  test::TempDir dir("ply");
  SUBCASE("hand-written ascii cube") {
    std::ofstream(dir / "cube.ply") << "ply\nformat ascii 1.0\ncomment unit cube\n"
                                       "element vertex 8\nproperty float x\nproperty float y\n"
                                       "property float z\nend_header\n"
                                       "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n";
    const PointCloud c = load_pointcloud_ply(dir / "cube.ply");
    REQUIRE(c.size() == 8);
    CHECK_FALSE(c.has_colors());
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(c.points[i] == Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
    }
  }
  SUBCASE("normals are ignored") {
    std::ofstream(dir / "n.ply") << "ply\nformat ascii 1.0\nelement vertex 2\n"
                                    "property double x\nproperty double y\nproperty double z\n"
                                    "property float nx\nproperty float ny\nproperty float nz\n"
                                    "end_header\n1 2 3 0 0 1\n4 5 6 1 0 0\n";
    const PointCloud c = load_pointcloud_ply(dir / "n.ply");
    REQUIRE(c.size() == 2);
    CHECK(c.points[1] == Vec3(4, 5, 6));
  }
  SUBCASE("round trips in both encodings") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10, 10);
    PointCloud c;
    for (int i = 0; i < 100; ++i) {
      c.points.emplace_back(u(rng), u(rng), u(rng));
      c.colors.push_back({static_cast<std::uint8_t>(i), 7, static_cast<std::uint8_t>(255 - i)});
    }
    for (PlyEncoding e : {PlyEncoding::kAscii, PlyEncoding::kBinaryLittleEndian}) {
      save_pointcloud_ply(c, dir / "rt.ply", e);
      const PointCloud back = load_pointcloud_ply(dir / "rt.ply");
      CHECK(back.points == c.points);
      CHECK(back.colors == c.colors);
    }
  }
  SUBCASE("mesh faces, including a fan-triangulated quad") {
    std::ofstream(dir / "m.ply") << "ply\nformat ascii 1.0\nelement vertex 4\n"
                                    "property float x\nproperty float y\nproperty float z\n"
                                    "element face 1\nproperty list uchar int vertex_indices\n"
                                    "end_header\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
    const SurfaceMesh m = load_mesh_ply(dir / "m.ply");
    CHECK(m.vertices.size() == 4);
    REQUIRE(m.triangles.size() == 2);
    CHECK(m.triangles[1] == std::array<int, 3>{0, 2, 3});
    save_mesh_ply(m, dir / "m2.ply");
    CHECK(load_mesh_ply(dir / "m2.ply").triangles == m.triangles);
    CHECK(load_pointcloud_ply(dir / "m.ply").size() == 4);
  }
  SUBCASE("malformed files") {
    CHECK_THROWS_AS(load_pointcloud_ply(dir / "absent.ply"), MissingFileError);
    std::ofstream(dir / "bad.ply") << "not a ply\n";
    CHECK_THROWS_AS(load_pointcloud_ply(dir / "bad.ply"), PlyFormatError);
    std::ofstream(dir / "short.ply") << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                                        "property float y\nproperty float z\nend_header\n1 2 3\n";
    CHECK_THROWS_AS(load_pointcloud_ply(dir / "short.ply"), PlyFormatError);
    std::ofstream(dir / "idx.ply") << "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
                                      "property float y\nproperty float z\nelement face 1\n"
                                      "property list uchar int vertex_indices\nend_header\n"
                                      "0 0 0\n3 0 1 2\n";
    CHECK_THROWS_AS(load_mesh_ply(dir / "idx.ply"), PlyFormatError);
  }
}

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/geometry.hpp"
#include "sparsear/image.hpp"

namespace sparsear {

/// Near clipping plane for rasterization, meters.
inline constexpr double kNearPlane = 0.01;

/// Triangles whose area exceeds the percentile threshold by more than this
/// relative amount are discarded; smaller excesses are rounding noise.
inline constexpr double kAreaTieTolerance = 1e-9;

using Triangle = std::array<int, 3>;

/// Per-pixel vertices lifted from a depth map and triangulated over the
/// pixel grid. Vertex i corresponds to pixel (i % width, i / width).
struct ScreenSpaceMesh {
  int width = 0;
  int height = 0;
  std::vector<Vec3> vertices;  // source-camera frame; zero where invalid
  std::vector<Rgb8> colors;
  std::vector<std::uint8_t> valid;
  std::vector<Triangle> triangles;  // kept triangles
  std::vector<double> areas;        // 3D area (m^2) of each kept triangle
  std::size_t candidate_triangles = 0;
  double area_threshold = 0.0;  // percentile value over candidate areas

  std::size_t valid_vertex_count() const;
  std::size_t discarded_triangles() const { return candidate_triangles - triangles.size(); }
};

/// Lifts every valid depth pixel and splits each fully valid 2x2 quad along
/// its top-left to bottom-right diagonal into (TL, TR, BR) and (TL, BR, BL).
/// Triangles whose 3D area exceeds the nearest-rank `area_percentile` of all
/// candidate areas are dropped.
ScreenSpaceMesh build_screen_space_mesh(const DepthMap& depth, const RgbImage& rgb,
                                        const Intrinsics& k, double area_percentile = 95.0);

/// Nearest-rank percentile (1-based rank ceil(p/100 * n)) of `values`.
double nearest_rank_percentile(std::vector<double> values, double percentile);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

struct WarpResult {
  RgbImage rgb;
  DepthMap depth;
  Mask valid_mask;
  double overlap_ratio = 0.0;
  std::size_t valid_pixels = 0;
  /// Valid-depth pixels of the source, kept for alternative normalization.
  std::size_t source_valid_pixels = 0;
};

/// Triangle soup already expressed in the target camera frame.
struct TargetMesh {
  std::vector<Vec3> vertices;
  std::vector<Rgb8> colors;  // one per vertex; may be empty for depth-only
  std::vector<Triangle> triangles;
};

/// Deterministic edge-function rasterizer: pixel centers at integer
/// coordinates, top-left fill rule, perspective-correct interpolation,
/// strict-less z-test (first submitted wins ties), clipping at kNearPlane,
/// no back-face culling.
WarpResult rasterize(const TargetMesh& mesh, const Intrinsics& k);

/// Warps a prebuilt mesh. Besides the kept triangles, every valid vertex is
/// also drawn as a single-pixel point into pixels that no triangle covered,
/// so samples next to discarded triangles are not lost.
WarpResult warp_mesh(const ScreenSpaceMesh& mesh, const RelativeTransform& src_to_dst,
                     const Intrinsics& k, bool with_color = true);

WarpResult warp_frame(const Frame& src, const std::string& depth_source, const PoseSE3& dst_pose,
                      const Intrinsics& k, double area_percentile = 95.0);

double overlap_ratio(const Frame& src, const std::string& depth_source, const PoseSE3& dst_pose,
                     const Intrinsics& k, double area_percentile = 95.0);

/// Builds a source mesh once and warps it to many target poses.
class FrameWarper {
 public:
  FrameWarper(const Frame& src, const std::string& depth_source, const Intrinsics& k,
              double area_percentile = 95.0);

  WarpResult warp_to(const PoseSE3& dst_pose) const;
  double overlap_to(const PoseSE3& dst_pose) const;
  const ScreenSpaceMesh& mesh() const { return mesh_; }

 private:
  ScreenSpaceMesh mesh_;
  PoseSE3 src_pose_;
  Intrinsics k_;
};

}  // namespace sparsear

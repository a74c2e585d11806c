#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/geometry.hpp"

namespace sparsear {

struct IcpParams {
  int max_iterations = 50;
  double max_correspondence_distance = 0.1;
  double convergence_translation = 1e-6;
  double convergence_rotation = 1e-6;

  void validate() const;
};

struct IcpResult {
  /// Maps source points into the destination frame.
  RelativeTransform transform;
  double rmse = 0.0;
  int iterations = 0;
  std::size_t correspondences = 0;
  bool converged = false;
};

/// Point-to-point ICP with a hard correspondence-distance gate.
/// Throws DegenerateRegistrationError when fewer than three pairs survive.
IcpResult icp_align(const PointCloud& src, const PointCloud& dst,
                    const RelativeTransform& init = RelativeTransform::identity(),
                    const IcpParams& params = {});

/// Least-squares rigid transform taking src[i] onto dst[i] (Kabsch with
/// reflection correction).
RelativeTransform best_fit_transform(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

struct ConcatMerge {};
struct FusedMerge {
  double voxel_size = 0.02;
};
struct FusedIcpMerge {
  double voxel_size = 0.02;
  IcpParams icp;
};
using MergeMethod = std::variant<ConcatMerge, FusedMerge, FusedIcpMerge>;

std::string merge_method_name(const MergeMethod& method);

struct MergeResult {
  PointCloud cloud;
  /// Inputs dropped because their registration was degenerate.
  std::vector<std::size_t> skipped;
  std::vector<std::string> warnings;
};

/// Lifts every stride-th valid pixel into the world frame with its color.
PointCloud frame_to_pointcloud(const Frame& frame, const std::string& depth_source,
                               const Intrinsics& k, int stride = 1);

/// One centroid per occupied voxel floor(p / voxel_size). Points are summed
/// in (voxel key, x, y, z) order so the result ignores input ordering.
PointCloud voxel_fuse(const PointCloud& cloud, double voxel_size);

MergeResult merge_clouds(const std::vector<PointCloud>& clouds, const MergeMethod& method);

struct ReconstructionOptions {
  int frame_stride = 1;
  int pixel_stride = 4;
  MergeMethod method = FusedMerge{};
  int jobs = 1;
};

/// Frames 0, s, 2s, ... lifted and merged.
MergeResult reconstruct_session(const Session& session, const std::string& depth_source,
                                const ReconstructionOptions& options);

}  // namespace sparsear

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/metrics.hpp"
#include "sparsear/reconstruction.hpp"
#include "sparsear/stats.hpp"

namespace sparsear {

struct WarpEvalOptions {
  std::vector<std::string> depth_sources{"gt"};
  /// Target depth compared against the warped depth. Empty uses "gt" when
  /// every frame has it, else the warped source itself.
  std::string reference_source;
  /// Gap 0 pairs a frame with itself.
  std::vector<int> gaps;
  std::size_t pairs_per_gap = 200;
  /// true: SSIM over pixels that are warped-valid and reference-valid.
  /// false: full image, unfilled pixels left black / zero.
  bool masked = true;
  std::uint64_t seed = 42;
  double depth_range = 10.0;
  double area_percentile = 95.0;
  int jobs = 1;
};

struct WarpPairResult {
  int gap = 0;
  std::string depth_source;
  std::size_t source_frame = 0;
  std::size_t target_frame = 0;
  /// NaN when the mask selected no pixel.
  double rgb_ssim = 0.0;
  double depth_ssim = 0.0;
  double overlap = 0.0;
  std::size_t mask_pixels = 0;
};

struct WarpAggregate {
  int gap = 0;
  std::string depth_source;
  /// Pairs with a nonempty mask; the others are counted in `empty_pairs`.
  std::size_t pairs = 0;
  std::size_t empty_pairs = 0;
  Summary rgb_ssim;
  Summary depth_ssim;
  Summary overlap;
};

struct WarpEvaluation {
  /// Sorted by (gap, depth source).
  std::vector<WarpAggregate> rows;
  std::vector<WarpPairResult> pairs;
  std::vector<std::string> warnings;
};

/// Samples the same frame pairs for every source (seeded per gap) and
/// compares each warp against the target frame's own rgb and depth.
WarpEvaluation evaluate_warps(const Session& session, const WarpEvalOptions& options);

struct ReconRecord {
  std::string depth_source;
  int stride = 1;
  std::size_t frames_used = 0;
  std::size_t points = 0;
  /// a = reconstruction, b = ground truth.
  HausdorffResult hausdorff;
  std::vector<std::size_t> skipped_clouds;
  std::vector<std::string> warnings;
  double runtime_s = 0.0;
};

struct ReconEvalOptions {
  std::vector<std::string> depth_sources{"gt"};
  std::vector<int> strides{1};
  ReconstructionOptions reconstruction;
  HausdorffParams hausdorff;
};

/// One record per (source, stride), sorted by source then stride. The
/// optional sink sees every reconstruction before it is released.
std::vector<ReconRecord> evaluate_reconstruction(
    const Session& session, const PointCloud& ground_truth, const ReconEvalOptions& options,
    const std::function<void(const ReconRecord&, const PointCloud&)>& sink = {});

}  // namespace sparsear

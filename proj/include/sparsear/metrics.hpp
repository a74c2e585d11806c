#pragma once

#include <optional>

#include "sparsear/dataset.hpp"
#include "sparsear/image.hpp"

namespace sparsear {

/// Gaussian-window SSIM constants.
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Single-channel image of doubles.
using GrayImage = Grid<double>;

GrayImage to_luma(const RgbImage& rgb);

/// Mean SSIM over pixels whose window center is set in `mask` (all pixels
/// without a mask). With a mask, the Gaussian window moments are
/// renormalized over mask-valid pixels, so unset pixels never contribute.
/// Borders use half-sample symmetric reflection.
/// Throws InvalidInputError on size mismatch or an empty mask.
double ssim(const GrayImage& a, const GrayImage& b, const Mask* mask = nullptr,
            const SsimParams& params = {});

/// RGB images are compared on luma (0.299 R + 0.587 G + 0.114 B).
double ssim(const RgbImage& a, const RgbImage& b, const Mask* mask = nullptr,
            const SsimParams& params = {});

/// Depths are clamped to [0, range_m] and scaled to [0, 1] with L = 1.
double ssim_depth(const DepthMap& a, const DepthMap& b, const Mask* mask = nullptr,
                  double range_m = 10.0);

/// Luminance-only SSIM of two constant images (closed form).
double constant_image_ssim(double c1, double c2, const SsimParams& params = {});

struct HausdorffParams {
  /// Bounding-box expansion applied before intersecting, meters.
  double overlap_margin = 0.05;
  /// Worker threads for the nearest-neighbour queries (<= 0: all cores).
  int jobs = 1;
};

struct HausdorffResult {
  double distance = 0.0;
  double directed_ab = 0.0;
  double directed_ba = 0.0;
  std::size_t a_points_in_overlap = 0;
  std::size_t b_points_in_overlap = 0;
};

/// Symmetric Hausdorff distance over the overlap region (intersection of
/// the two expanded bounding boxes), with exact nearest neighbours.
/// Throws NoOverlapError when either cropped cloud is empty.
HausdorffResult hausdorff(const PointCloud& a, const PointCloud& b,
                          const HausdorffParams& params = {});

/// max over `from` of min over `to` of the Euclidean distance, exact.
double directed_hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to, int jobs = 1);

}  // namespace sparsear

#include "sparsear/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sparsear/error.hpp"
#include "sparsear/kdtree.hpp"
#include "sparsear/parallel.hpp"

namespace sparsear {

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Half-sample symmetric reflection: ... b a | a b c ... c | c b ...
int reflect(int i, int n) {
  const int period = 2 * n;
  int j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - 1 - j;
}

GrayImage blur(const GrayImage& img, const std::vector<double>& kernel) {
  const int w = img.width();
  const int h = img.height();
  const int r = static_cast<int>(kernel.size()) / 2;
  GrayImage tmp(w, h);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int t = 0; t < static_cast<int>(kernel.size()); ++t) {
        s += kernel[t] * img.at(reflect(x + t - r, w), y);
      }
      tmp.at(x, y) = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int t = 0; t < static_cast<int>(kernel.size()); ++t) {
        s += kernel[t] * tmp.at(x, reflect(y + t - r, h));
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

GrayImage product(const GrayImage& a, const GrayImage& b) {
  GrayImage out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

GrayImage to_luma(const RgbImage& rgb) {
  GrayImage out(rgb.width(), rgb.height());
  for (std::size_t i = 0; i < rgb.size(); ++i) out[i] = luma(rgb[i]);
  return out;
}

double ssim(const GrayImage& a, const GrayImage& b, const Mask* mask, const SsimParams& params) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidInputError("ssim: image dimensions differ");
  }
  if (mask != nullptr && (mask->width() != a.width() || mask->height() != a.height())) {
    throw InvalidInputError("ssim: mask dimensions differ");
  }
  if (a.empty()) throw InvalidInputError("ssim: empty image");
  if (!(params.dynamic_range > 0.0) || params.window < 1 || params.window % 2 == 0 ||
      !(params.sigma > 0.0)) {
    throw InvalidInputError("ssim: invalid parameters");
  }
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);

  // With a mask, window moments are taken over mask-valid pixels only.
  GrayImage weight(a.width(), a.height(), 1.0);
  GrayImage ma = a;
  GrayImage mb = b;
  if (mask != nullptr) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      weight[i] = (*mask)[i] ? 1.0 : 0.0;
      ma[i] *= weight[i];
      mb[i] *= weight[i];
    }
  }
  const GrayImage w = blur(weight, kernel);
  const GrayImage mu_a = blur(ma, kernel);
  const GrayImage mu_b = blur(mb, kernel);
  const GrayImage e_aa = blur(product(ma, a), kernel);
  const GrayImage e_bb = blur(product(mb, b), kernel);
  const GrayImage e_ab = blur(product(ma, b), kernel);

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    const double ua = mu_a[i] / w[i];
    const double ub = mu_b[i] / w[i];
    const double var_a = e_aa[i] / w[i] - ua * ua;
    const double var_b = e_bb[i] / w[i] - ub * ub;
    const double cov = e_ab[i] / w[i] - ua * ub;
    const double num = (2.0 * (ua * ub) + c1) * (2.0 * cov + c2);
    const double den = (ua * ua + ub * ub + c1) * (var_a + var_b + c2);
    sum += num / den;
    ++count;
  }
  if (count == 0) throw InvalidInputError("ssim: mask selects no pixels");
  return sum / static_cast<double>(count);
}

double ssim(const RgbImage& a, const RgbImage& b, const Mask* mask, const SsimParams& params) {
  return ssim(to_luma(a), to_luma(b), mask, params);
}

double ssim_depth(const DepthMap& a, const DepthMap& b, const Mask* mask, double range_m) {
  if (!(range_m > 0.0)) throw InvalidInputError("ssim_depth: range must be positive");
  auto normalize = [range_m](const DepthMap& d) {
    GrayImage out(d.width(), d.height());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = std::clamp(d[i], 0.0, range_m) / range_m;
    return out;
  };
  SsimParams params;
  params.dynamic_range = 1.0;
  return ssim(normalize(a), normalize(b), mask, params);
}

double constant_image_ssim(double c1_value, double c2_value, const SsimParams& params) {
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  return (2.0 * c1_value * c2_value + c1) / (c1_value * c1_value + c2_value * c2_value + c1);
}

double directed_hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to, int jobs) {
  if (from.empty() || to.empty()) throw NoOverlapError("directed_hausdorff: empty point set");
  const KdTree tree(to);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (from.size() + kChunk - 1) / kChunk;
  std::vector<double> chunk_max(chunks, 0.0);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t end = std::min(from.size(), (c + 1) * kChunk);
    double m = 0.0;
    for (std::size_t i = c * kChunk; i < end; ++i) {
      m = std::max(m, tree.nearest(from[i]).squared_distance);
    }
    chunk_max[c] = m;
  });
  return std::sqrt(*std::max_element(chunk_max.begin(), chunk_max.end()));
}

HausdorffResult hausdorff(const PointCloud& a, const PointCloud& b, const HausdorffParams& params) {
  if (!(params.overlap_margin >= 0.0)) {
    throw InvalidInputError("hausdorff: overlap_margin must be nonnegative");
  }
  if (a.empty() || b.empty()) throw NoOverlapError("hausdorff: empty input cloud");
  auto bounds = [](const std::vector<Vec3>& pts) {
    Vec3 lo = pts.front();
    Vec3 hi = lo;
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return std::pair{lo, hi};
  };
  const Vec3 margin = Vec3::Constant(params.overlap_margin);
  auto [alo, ahi] = bounds(a.points);
  auto [blo, bhi] = bounds(b.points);
  const Vec3 lo = (alo - margin).cwiseMax(blo - margin);
  const Vec3 hi = (ahi + margin).cwiseMin(bhi + margin);
  auto crop = [&](const std::vector<Vec3>& pts) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
      if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) out.push_back(p);
    }
    return out;
  };
  const auto ca = crop(a.points);
  const auto cb = crop(b.points);
  if (ca.empty() || cb.empty()) {
    throw NoOverlapError("hausdorff: clouds do not overlap within the margin");
  }
  HausdorffResult r;
  r.a_points_in_overlap = ca.size();
  r.b_points_in_overlap = cb.size();
  r.directed_ab = directed_hausdorff(ca, cb, params.jobs);
  r.directed_ba = directed_hausdorff(cb, ca, params.jobs);
  r.distance = std::max(r.directed_ab, r.directed_ba);
  return r;
}

}  // namespace sparsear

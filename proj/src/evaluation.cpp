#include "sparsear/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "sparsear/error.hpp"
#include "sparsear/parallel.hpp"
#include "sparsear/policies.hpp"
#include "sparsear/warp.hpp"

namespace sparsear {

namespace {

bool all_frames_have(const Session& s, const std::string& source) {
  return std::all_of(s.frames.begin(), s.frames.end(),
                     [&](const Frame& f) { return f.has_depth(source); });
}

void require_source(const Session& s, const std::string& source) {
  if (!all_frames_have(s, source)) throw UnknownDepthSourceError(source);
}

Summary summarize_finite(const std::vector<double>& values) {
  std::vector<double> kept;
  for (double v : values) {
    if (!std::isnan(v)) kept.push_back(v);
  }
  if (kept.empty()) {
    Summary s;
    s.mean = s.min = s.max = s.median = s.p10 = s.p90 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  return summarize(std::move(kept));
}

}  // namespace

WarpEvaluation evaluate_warps(const Session& session, const WarpEvalOptions& options) {
  if (session.frames.empty()) throw InvalidInputError("evaluate_warps: empty session");
  if (options.depth_sources.empty()) throw InvalidInputError("evaluate_warps: no depth source");
  if (options.pairs_per_gap == 0) throw InvalidInputError("evaluate_warps: pairs_per_gap must be > 0");
  std::vector<std::string> sources = options.depth_sources;
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  for (const auto& s : sources) require_source(session, s);
  if (!options.reference_source.empty()) require_source(session, options.reference_source);
  const bool gt_everywhere = all_frames_have(session, "gt");
  auto reference_for = [&](const std::string& source) {
    if (!options.reference_source.empty()) return options.reference_source;
    return gt_everywhere ? std::string("gt") : source;
  };

  std::vector<int> gaps = options.gaps;
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());

  WarpEvaluation eval;
  std::mt19937_64 rng(options.seed);
  for (int g : gaps) {
    if (g < 0) throw InvalidInputError("evaluate_warps: gaps must be >= 0");
    if (static_cast<std::size_t>(g) >= session.size()) {
      eval.warnings.push_back("gap " + std::to_string(g) + " skipped: session has only " +
                              std::to_string(session.size()) + " frames");
      continue;
    }
    const auto starts = sample_pair_starts(session.size() - g, options.pairs_per_gap, rng);
    for (const auto& source : sources) {
      for (std::size_t i : starts) {
        WarpPairResult p;
        p.gap = g;
        p.depth_source = source;
        p.source_frame = i;
        p.target_frame = i + static_cast<std::size_t>(g);
        eval.pairs.push_back(std::move(p));
      }
    }
  }

  const Intrinsics& k = session.intrinsics;
  parallel_for(eval.pairs.size(), options.jobs, [&](std::size_t n) {
    WarpPairResult& p = eval.pairs[n];
    const Frame& src = session.frames[p.source_frame];
    const Frame& dst = session.frames[p.target_frame];
    const WarpResult w = warp_frame(src, p.depth_source, dst.pose, k, options.area_percentile);
    const DepthMap& reference = dst.depth(reference_for(p.depth_source));
    p.overlap = w.overlap_ratio;
    if (options.masked) {
      Mask mask(k.width, k.height);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = w.valid_mask[i] && reference[i] > 0.0 ? 1 : 0;
        p.mask_pixels += mask[i];
      }
      if (p.mask_pixels == 0) {
        p.rgb_ssim = p.depth_ssim = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      p.rgb_ssim = ssim(w.rgb, dst.rgb, &mask);
      p.depth_ssim = ssim_depth(w.depth, reference, &mask, options.depth_range);
    } else {
      p.mask_pixels = k.pixel_count();
      p.rgb_ssim = ssim(w.rgb, dst.rgb);
      p.depth_ssim = ssim_depth(w.depth, reference, nullptr, options.depth_range);
    }
  });

  for (std::size_t begin = 0; begin < eval.pairs.size();) {
    std::size_t end = begin;
    while (end < eval.pairs.size() && eval.pairs[end].gap == eval.pairs[begin].gap &&
           eval.pairs[end].depth_source == eval.pairs[begin].depth_source) {
      ++end;
    }
    WarpAggregate row;
    row.gap = eval.pairs[begin].gap;
    row.depth_source = eval.pairs[begin].depth_source;
    std::vector<double> rgb, depth, overlap;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = eval.pairs[i];
      overlap.push_back(p.overlap);
      rgb.push_back(p.rgb_ssim);
      depth.push_back(p.depth_ssim);
      if (std::isnan(p.rgb_ssim)) {
        ++row.empty_pairs;
      } else {
        ++row.pairs;
      }
    }
    row.rgb_ssim = summarize_finite(rgb);
    row.depth_ssim = summarize_finite(depth);
    row.overlap = summarize(overlap);
    eval.rows.push_back(std::move(row));
    begin = end;
  }
  return eval;
}

std::vector<ReconRecord> evaluate_reconstruction(
    const Session& session, const PointCloud& ground_truth, const ReconEvalOptions& options,
    const std::function<void(const ReconRecord&, const PointCloud&)>& sink) {
  if (ground_truth.empty()) throw InvalidInputError("evaluate_reconstruction: empty ground truth");
  std::vector<std::string> sources = options.depth_sources;
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  std::vector<int> strides = options.strides;
  std::sort(strides.begin(), strides.end());
  strides.erase(std::unique(strides.begin(), strides.end()), strides.end());
  for (const auto& s : sources) require_source(session, s);
  for (int s : strides) {
    if (s < 1) throw InvalidInputError("evaluate_reconstruction: strides must be >= 1");
  }

  std::vector<ReconRecord> records;
  for (const auto& source : sources) {
    for (int stride : strides) {
      const auto t0 = std::chrono::steady_clock::now();
      ReconstructionOptions ro = options.reconstruction;
      ro.frame_stride = stride;
      MergeResult merged = reconstruct_session(session, source, ro);
      ReconRecord r;
      r.depth_source = source;
      r.stride = stride;
      r.frames_used = (session.size() + static_cast<std::size_t>(stride) - 1) / static_cast<std::size_t>(stride);
      r.points = merged.cloud.size();
      r.skipped_clouds = std::move(merged.skipped);
      r.warnings = std::move(merged.warnings);
      HausdorffParams hp = options.hausdorff;
      hp.jobs = ro.jobs;
      r.hausdorff = hausdorff(merged.cloud, ground_truth, hp);
      r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (sink) sink(r, merged.cloud);
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace sparsear

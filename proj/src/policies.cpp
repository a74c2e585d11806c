#include "sparsear/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsear/error.hpp"
#include "sparsear/geometry.hpp"
#include "sparsear/parallel.hpp"
#include "sparsear/warp.hpp"

namespace sparsear {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pair_overlap(const Session& s, std::size_t i, std::size_t j, const std::string& source,
                    double pct) {
  return overlap_ratio(s.frames[i], source, s.frames[j].pose, s.intrinsics, pct);
}

bool all_frames_have(const Session& s, const std::string& source) {
  return std::all_of(s.frames.begin(), s.frames.end(),
                     [&](const Frame& f) { return f.has_depth(source); });
}

void finish_report(SelectionReport& r, std::size_t n) {
  r.selection_ratio = static_cast<double>(r.selected_indices.size()) / static_cast<double>(n);
  if (r.consecutive_overlaps.empty()) {
    r.min_overlap = kNaN;
    r.mean_overlap = kNaN;
    return;
  }
  double sum = 0.0;
  r.min_overlap = r.consecutive_overlaps.front();
  for (double v : r.consecutive_overlaps) {
    sum += v;
    r.min_overlap = std::min(r.min_overlap, v);
  }
  r.mean_overlap = sum / static_cast<double>(r.consecutive_overlaps.size());
}

void fill_consecutive(const Session& s, SelectionReport& r, const std::string& source,
                      const PolicyOptions& options) {
  const auto& sel = r.selected_indices;
  if (sel.size() < 2) return;
  r.consecutive_overlaps.assign(sel.size() - 1, 0.0);
  parallel_for(sel.size() - 1, options.jobs, [&](std::size_t k) {
    r.consecutive_overlaps[k] = pair_overlap(s, sel[k], sel[k + 1], source, options.area_percentile);
  });
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

}  // namespace

std::string policy_name(const PolicySpec& policy) {
  switch (policy.index()) {
    case 0:
      return "temporal";
    case 1:
      return "spatial";
    default:
      return "oracle";
  }
}

void validate_policy(const PolicySpec& policy) {
  if (const auto* t = std::get_if<TemporalPolicy>(&policy)) {
    if (t->interval_frames < 1) throw InvalidInputError("temporal: interval must be >= 1");
  } else if (const auto* sp = std::get_if<SpatialPolicy>(&policy)) {
    if (!(sp->geodesic_threshold > 0.0)) throw InvalidInputError("spatial: threshold must be > 0");
    if (!(sp->rho > 0.0)) throw InvalidInputError("spatial: rho must be > 0");
  } else {
    const auto& o = std::get<OraclePolicy>(policy);
    if (!(o.min_overlap > 0.0 && o.min_overlap <= 1.0)) {
      throw InvalidInputError("oracle: min_overlap must lie in (0, 1]");
    }
    if (o.depth_source.empty()) throw InvalidInputError("oracle: depth source required");
  }
}

std::string reporting_source(const Session& session, const PolicySpec& policy,
                             const PolicyOptions& options) {
  if (!options.overlap_source.empty()) return options.overlap_source;
  if (all_frames_have(session, "gt")) return "gt";
  if (const auto* o = std::get_if<OraclePolicy>(&policy)) return o->depth_source;
  throw UnknownDepthSourceError("gt");
}

SelectionReport select_frames(const Session& session, const PolicySpec& policy,
                              const PolicyOptions& options) {
  if (session.frames.empty()) throw InvalidInputError("select_frames: empty session");
  validate_policy(policy);
  const std::size_t n = session.size();
  SelectionReport r;

  if (const auto* t = std::get_if<TemporalPolicy>(&policy)) {
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(t->interval_frames)) {
      r.selected_indices.push_back(i);
    }
    fill_consecutive(session, r, reporting_source(session, policy, options), options);
  } else if (const auto* sp = std::get_if<SpatialPolicy>(&policy)) {
    r.selected_indices.push_back(0);
    for (std::size_t j = 1; j < n; ++j) {
      const auto& last = session.frames[r.selected_indices.back()].pose;
      if (se3_geodesic(last, session.frames[j].pose, sp->rho) >= sp->geodesic_threshold) {
        r.selected_indices.push_back(j);
      }
    }
    fill_consecutive(session, r, reporting_source(session, policy, options), options);
  } else {
    const auto& o = std::get<OraclePolicy>(policy);
    for (const auto& f : session.frames) {
      if (!f.has_depth(o.depth_source)) throw UnknownDepthSourceError(o.depth_source);
    }
    const std::size_t block = static_cast<std::size_t>(options.jobs <= 0 ? default_jobs() : options.jobs);
    r.selected_indices.push_back(0);
    std::size_t i = 0;
    while (i + 1 < n) {
      const FrameWarper warper(session.frames[i], o.depth_source, session.intrinsics,
                               options.area_percentile);
      std::size_t best = i;
      double best_overlap = 0.0;
      double first_overlap = 0.0;
      bool stop = false;
      // Candidates are evaluated in blocks so workers can run ahead; the
      // scan itself still stops at the first failure.
      for (std::size_t j = i + 1; j < n && !stop;) {
        const std::size_t end = std::min(n, j + block);
        std::vector<double> ov(end - j);
        parallel_for(ov.size(), options.jobs,
                     [&](std::size_t k) { ov[k] = warper.overlap_to(session.frames[j + k].pose); });
        for (std::size_t k = 0; k < ov.size(); ++k) {
          if (j + k == i + 1) first_overlap = ov[k];
          if (ov[k] >= o.min_overlap) {
            best = j + k;
            best_overlap = ov[k];
          } else {
            stop = true;
            break;
          }
        }
        j = end;
      }
      if (best == i) {
        best = i + 1;
        best_overlap = first_overlap;
      }
      r.selected_indices.push_back(best);
      r.consecutive_overlaps.push_back(best_overlap);
      i = best;
    }
    const std::string report = reporting_source(session, policy, options);
    if (report != o.depth_source) {
      r.consecutive_overlaps.clear();
      fill_consecutive(session, r, report, options);
    }
  }
  finish_report(r, n);
  return r;
}

std::vector<std::vector<double>> overlap_matrix(const Session& session,
                                                const std::string& depth_source,
                                                const PolicyOptions& options) {
  const std::size_t n = session.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  parallel_for(n, options.jobs, [&](std::size_t i) {
    const FrameWarper warper(session.frames[i], depth_source, session.intrinsics,
                             options.area_percentile);
    for (std::size_t j = i + 1; j < n; ++j) m[i][j] = warper.overlap_to(session.frames[j].pose);
  });
  return m;
}

std::vector<std::size_t> sample_pair_starts(std::size_t candidates, std::size_t max_pairs,
                                            std::mt19937_64& rng) {
  std::vector<std::size_t> idx(candidates);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (candidates <= max_pairs) return idx;
  for (std::size_t k = 0; k < max_pairs; ++k) {
    const auto r = k + static_cast<std::size_t>(bounded(rng, candidates - k));
    std::swap(idx[k], idx[r]);
  }
  idx.resize(max_pairs);
  std::sort(idx.begin(), idx.end());
  return idx;
}

OverlapCurve overlap_curve(const Session& session, const std::vector<int>& gaps,
                           const std::string& depth_source, std::size_t max_pairs_per_gap,
                           std::uint64_t seed, const PolicyOptions& options) {
  if (max_pairs_per_gap == 0) throw InvalidInputError("overlap_curve: max_pairs_per_gap must be > 0");
  std::vector<int> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& f : session.frames) {
    if (!f.has_depth(depth_source)) throw UnknownDepthSourceError(depth_source);
  }

  std::mt19937_64 rng(seed);
  OverlapCurve curve;
  std::vector<PairOverlap*> work;
  for (int g : sorted) {
    if (g <= 0) throw InvalidInputError("overlap_curve: gaps must be positive");
    if (static_cast<std::size_t>(g) >= session.size()) {
      curve.warnings.push_back("gap " + std::to_string(g) + " skipped: session has only " +
                               std::to_string(session.size()) + " frames");
      continue;
    }
    CurveRow row;
    row.gap = g;
    for (std::size_t i : sample_pair_starts(session.size() - g, max_pairs_per_gap, rng)) {
      row.pairs.push_back({i, i + static_cast<std::size_t>(g), 0.0});
    }
    curve.rows.push_back(std::move(row));
  }
  for (auto& row : curve.rows) {
    for (auto& p : row.pairs) work.push_back(&p);
  }
  parallel_for(work.size(), options.jobs, [&](std::size_t k) {
    work[k]->overlap =
        pair_overlap(session, work[k]->source, work[k]->target, depth_source, options.area_percentile);
  });
  for (auto& row : curve.rows) {
    std::vector<double> values;
    for (const auto& p : row.pairs) values.push_back(p.overlap);
    row.overlap = summarize(values);
  }
  return curve;
}

std::vector<GeodesicRow> geodesic_curve(const Session& session,
                                        const std::vector<double>& thresholds, double rho,
                                        const PolicyOptions& options) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0) || (i > 0 && !(thresholds[i] > thresholds[i - 1]))) {
      throw InvalidInputError("geodesic_curve: thresholds must be positive and ascending");
    }
  }
  std::vector<GeodesicRow> rows;
  for (double t : thresholds) {
    rows.push_back({t, select_frames(session, SpatialPolicy{t, rho}, options)});
  }
  return rows;
}

}  // namespace sparsear

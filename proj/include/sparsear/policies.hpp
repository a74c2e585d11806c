#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/stats.hpp"

namespace sparsear {

struct TemporalPolicy {
  int interval_frames = 1;
};

struct SpatialPolicy {
  double geodesic_threshold = 0.1;
  double rho = 1.0;
};

struct OraclePolicy {
  double min_overlap = 0.8;
  std::string depth_source = "gt";
};

using PolicySpec = std::variant<TemporalPolicy, SpatialPolicy, OraclePolicy>;

std::string policy_name(const PolicySpec& policy);

/// Throws InvalidInputError when a parameter is out of range.
void validate_policy(const PolicySpec& policy);

struct SelectionReport {
  std::vector<std::size_t> selected_indices;
  double selection_ratio = 0.0;
  /// overlap(selected[k] -> selected[k + 1]) for every consecutive pair.
  std::vector<double> consecutive_overlaps;
  /// Both are NaN when fewer than two frames were selected.
  double min_overlap = 0.0;
  double mean_overlap = 0.0;
};

struct PolicyOptions {
  /// Depth used to report overlaps of temporal and spatial selections.
  /// Empty picks "gt" when every frame has it, else the oracle source.
  std::string overlap_source;
  double area_percentile = 95.0;
  int jobs = 1;
};

/// Resolves PolicyOptions::overlap_source for a session.
std::string reporting_source(const Session& session, const PolicySpec& policy,
                             const PolicyOptions& options);

SelectionReport select_frames(const Session& session, const PolicySpec& policy,
                              const PolicyOptions& options = {});

/// Overlap of every ordered pair i -> j with j > i (row-major upper
/// triangle; other entries are 0). Brute-force reference for small sessions.
std::vector<std::vector<double>> overlap_matrix(const Session& session,
                                                const std::string& depth_source,
                                                const PolicyOptions& options = {});

struct PairOverlap {
  std::size_t source = 0;
  std::size_t target = 0;
  double overlap = 0.0;
};

struct CurveRow {
  int gap = 0;
  Summary overlap;
  std::vector<PairOverlap> pairs;
};

struct OverlapCurve {
  std::vector<CurveRow> rows;
  std::vector<std::string> warnings;
};

/// Start frames for each gap, sampled without replacement and returned in
/// ascending order. All starts are used when there are at most `max_pairs`.
/// Uses its own bounded draw so results match across standard libraries.
std::vector<std::size_t> sample_pair_starts(std::size_t candidates, std::size_t max_pairs,
                                            std::mt19937_64& rng);

/// Gaps that do not fit in the session are skipped with a warning.
OverlapCurve overlap_curve(const Session& session, const std::vector<int>& gaps,
                           const std::string& depth_source, std::size_t max_pairs_per_gap = 200,
                           std::uint64_t seed = 42, const PolicyOptions& options = {});

struct GeodesicRow {
  double threshold = 0.0;
  SelectionReport report;
};

/// Spatial policy per threshold (ascending, positive).
std::vector<GeodesicRow> geodesic_curve(const Session& session,
                                        const std::vector<double>& thresholds, double rho,
                                        const PolicyOptions& options = {});

}  // namespace sparsear

#include <algorithm>
#include <iostream>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "sparsear/dataset.hpp"
#include "sparsear/error.hpp"
#include "sparsear/policies.hpp"
#include "sparsear/report.hpp"

namespace sparsear::cli {

namespace {

struct PolicyArgs {
  std::string session;
  std::string policy;
  std::string sweep;
  double rho = 1.0;
  double min_overlap = 0.8;
  std::string depth_source = "gt";
  std::string report_source;
  std::string out;
  std::string curve_out;
  std::string curve_gaps;
  std::size_t pairs_per_gap = 200;
  std::string plot;
  std::uint64_t seed = 42;
  double area_percentile = 95.0;
  int jobs = 0;
};

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream o;
  for (std::size_t i = 0; i < v.size(); ++i) o << (i ? " " : "") << v[i];
  return o.str();
}

void run(const PolicyArgs& a) {
  std::vector<double> params;
  if (!a.sweep.empty()) {
    params = double_list_flag("--sweep", a.sweep);
  } else if (a.policy == "oracle") {
    params = {a.min_overlap};
  } else {
    throw UsageError("--sweep is required for the " + a.policy + " policy");
  }
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  std::vector<PolicySpec> specs;
  for (double p : params) {
    PolicySpec spec;
    if (a.policy == "temporal") {
      if (p < 1 || p != static_cast<int>(p)) throw UsageError("temporal intervals must be integers >= 1");
      spec = TemporalPolicy{static_cast<int>(p)};
    } else if (a.policy == "spatial") {
      spec = SpatialPolicy{p, a.rho};
    } else {
      spec = OraclePolicy{p, a.depth_source};
    }
    try {
      validate_policy(spec);
    } catch (const InvalidInputError& e) {
      throw UsageError(e.what());
    }
    specs.push_back(spec);
  }
  std::vector<int> curve_gaps;
  if (!a.curve_out.empty()) {
    if (!a.curve_gaps.empty()) {
      curve_gaps = int_list_flag("--curve-gaps", a.curve_gaps);
    } else if (a.policy == "temporal") {
      for (double p : params) curve_gaps.push_back(static_cast<int>(p));
    } else {
      curve_gaps = int_list_flag("--curve-gaps", "1..10:1");
    }
    for (int g : curve_gaps) {
      if (g < 1) throw UsageError("--curve-gaps must be >= 1");
    }
  }
  if (!(a.area_percentile > 0.0 && a.area_percentile <= 100.0)) {
    throw UsageError("--area-percentile must lie in (0, 100]");
  }

  const Session session = load_session(a.session);
  PolicyOptions options;
  options.overlap_source = a.report_source;
  options.area_percentile = a.area_percentile;
  options.jobs = a.jobs;

  CsvTable table;
  table.header = {"schema_version", "policy", "param", "rho", "overlap_source", "frames",
                  "selected", "selection_ratio", "min_overlap", "mean_overlap", "selected_indices"};
  PlotSeries ratio{"selection ratio", {}};
  PlotSeries overlap{"mean consecutive overlap", {}};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SelectionReport r = select_frames(session, specs[i], options);
    const std::string source = reporting_source(session, specs[i], options);
    table.rows.push_back({std::to_string(kSchemaVersion), a.policy, format_number(params[i]),
                          a.policy == "spatial" ? format_number(a.rho) : "", source,
                          std::to_string(session.size()), std::to_string(r.selected_indices.size()),
                          format_number(r.selection_ratio), format_number(r.min_overlap),
                          format_number(r.mean_overlap), join(r.selected_indices)});
    ratio.points.emplace_back(params[i], r.selection_ratio);
    overlap.points.emplace_back(params[i], r.mean_overlap);
  }
  write_file_atomic(a.out, to_csv(table));

  if (!a.curve_out.empty()) {
    const OverlapCurve curve =
        overlap_curve(session, curve_gaps, a.report_source.empty() ? a.depth_source : a.report_source,
                      a.pairs_per_gap, a.seed, options);
    for (const auto& w : curve.warnings) warn(w);
    CsvTable c;
    c.header = {"schema_version", "gap", "depth_source", "pairs", "mean", "min",
                "max", "median", "p10", "p90"};
    for (const auto& row : curve.rows) {
      const Summary& s = row.overlap;
      c.rows.push_back({std::to_string(kSchemaVersion), std::to_string(row.gap),
                        a.report_source.empty() ? a.depth_source : a.report_source,
                        std::to_string(s.count), format_number(s.mean), format_number(s.min),
                        format_number(s.max), format_number(s.median), format_number(s.p10),
                        format_number(s.p90)});
    }
    write_file_atomic(a.curve_out, to_csv(c));
  }

  if (!a.plot.empty()) {
    const std::string x = a.policy == "temporal"  ? "interval (frames)"
                          : a.policy == "spatial" ? "geodesic threshold"
                                                  : "minimum overlap";
    write_file_atomic(a.plot, svg_line_plot(a.policy + " policy", x, "value", {ratio, overlap}));
  }
}

}  // namespace

void register_policy_eval(CLI::App& app, Action& action) {
  auto args = std::make_shared<PolicyArgs>();
  auto* sub = app.add_subcommand("policy-eval", "Run frame-selection policies and overlap curves");
  sub->add_option("--session", args->session, "Session directory")->required();
  sub->add_option("--policy", args->policy, "temporal, spatial or oracle")
      ->required()->check(CLI::IsMember({"temporal", "spatial", "oracle"}));
  sub->add_option("--sweep", args->sweep,
                  "Parameter values: intervals (temporal), geodesic thresholds (spatial) or "
                  "minimum overlaps (oracle), e.g. 1..8:1 or 0.05,0.1");
  sub->add_option("--rho", args->rho, "Geodesic translation scale, meters")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--min-overlap", args->min_overlap, "Oracle overlap bound when --sweep is absent")
      ->capture_default_str();
  sub->add_option("--depth-source", args->depth_source, "Oracle depth source")->capture_default_str();
  sub->add_option("--report-source", args->report_source,
                  "Depth used to report overlaps (default gt when present)");
  sub->add_option("--out", args->out, "Selection CSV")->required();
  sub->add_option("--curve-out", args->curve_out, "Optional overlap-by-gap CSV");
  sub->add_option("--curve-gaps", args->curve_gaps,
                  "Gaps for --curve-out (default: the temporal sweep, else 1..10:1)");
  sub->add_option("--pairs-per-gap", args->pairs_per_gap, "Maximum sampled pairs per curve gap")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--plot", args->plot, "Optional SVG of selection ratio and overlap");
  sub->add_option("--seed", args->seed, "Curve pair sampling seed")->capture_default_str();
  sub->add_option("--area-percentile", args->area_percentile, "Triangle area filter percentile")
      ->capture_default_str();
  sub->add_option("--jobs", args->jobs, "Worker threads (0: all cores)")->capture_default_str();
  sub->footer(
      "Selection CSV columns: schema_version, policy, param, rho, overlap_source, frames, selected, "
      "selection_ratio, min_overlap, mean_overlap (empty when one frame is selected), "
      "selected_indices (space separated). Curve CSV columns: schema_version, gap, depth_source, "
      "pairs, mean, min, max, median, p10, p90.");
  sub->callback([&action, args] { action = [args] { run(*args); }; });
}

}  // namespace sparsear::cli

#include <algorithm>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "sparsear/dataset.hpp"
#include "sparsear/evaluation.hpp"
#include "sparsear/report.hpp"

namespace sparsear::cli {

namespace {

struct WarpArgs {
  std::string session;
  std::vector<std::string> sources{"gt"};
  std::string reference;
  std::string gaps = "10..100:10";
  std::size_t pairs_per_gap = 200;
  std::string mask = "valid";
  std::string out;
  std::string per_pair_out;
  std::string plot;
  std::uint64_t seed = 42;
  int jobs = 0;
  double depth_range = 10.0;
  double area_percentile = 95.0;
};

std::vector<std::string> summary_header(const std::string& prefix) {
  return {prefix, prefix + "_median", prefix + "_p10", prefix + "_p90"};
}

void append_summary(std::vector<std::string>& row, const Summary& s) {
  for (double v : {s.mean, s.median, s.p10, s.p90}) row.push_back(format_number(v));
}

void run(const WarpArgs& a) {
  WarpEvalOptions o;
  o.depth_sources = a.sources;
  o.reference_source = a.reference;
  o.gaps = int_list_flag("--gaps", a.gaps);
  for (int g : o.gaps) {
    if (g < 0) throw UsageError("--gaps must be >= 0");
  }
  if (!(a.area_percentile > 0.0)) throw UsageError("--area-percentile must lie in (0, 100]");
  o.pairs_per_gap = a.pairs_per_gap;
  o.masked = a.mask == "valid";
  o.seed = a.seed;
  o.depth_range = a.depth_range;
  o.area_percentile = a.area_percentile;
  o.jobs = a.jobs;

  const Session session = load_session(a.session);
  const WarpEvaluation eval = evaluate_warps(session, o);
  for (const auto& w : eval.warnings) warn(w);

  CsvTable table;
  table.header = {"schema_version", "gap", "depth_source", "mask", "ssim_color", "pairs", "empty_pairs"};
  for (const char* m : {"rgb_ssim", "depth_ssim", "overlap"}) {
    for (auto& h : summary_header(m)) table.header.push_back(h);
  }
  for (const auto& r : eval.rows) {
    std::vector<std::string> row{std::to_string(kSchemaVersion), std::to_string(r.gap), r.depth_source,
                                 a.mask, "luma", std::to_string(r.pairs), std::to_string(r.empty_pairs)};
    append_summary(row, r.rgb_ssim);
    append_summary(row, r.depth_ssim);
    append_summary(row, r.overlap);
    table.rows.push_back(std::move(row));
  }
  write_file_atomic(a.out, to_csv(table));

  if (!a.per_pair_out.empty()) {
    CsvTable pairs;
    pairs.header = {"schema_version", "gap", "depth_source", "source_frame", "target_frame",
                    "rgb_ssim", "depth_ssim", "overlap", "mask_pixels"};
    for (const auto& p : eval.pairs) {
      pairs.rows.push_back({std::to_string(kSchemaVersion), std::to_string(p.gap), p.depth_source,
                            std::to_string(p.source_frame), std::to_string(p.target_frame),
                            format_number(p.rgb_ssim), format_number(p.depth_ssim),
                            format_number(p.overlap), std::to_string(p.mask_pixels)});
    }
    write_file_atomic(a.per_pair_out, to_csv(pairs));
  }

  if (!a.plot.empty()) {
    std::vector<PlotSeries> series;
    for (const auto& r : eval.rows) {
      for (const auto& [metric, value] :
           {std::pair{"rgb", r.rgb_ssim.mean}, std::pair{"depth", r.depth_ssim.mean}}) {
        const std::string name = r.depth_source + " " + metric;
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const PlotSeries& s) { return s.name == name; });
        if (it == series.end()) {
          series.push_back({name, {}});
          it = series.end() - 1;
        }
        it->points.emplace_back(r.gap, value);
      }
    }
    write_file_atomic(a.plot, svg_line_plot("Warp fidelity", "frame gap", "mean SSIM", series));
  }
}

}  // namespace

void register_warp_eval(CLI::App& app, Action& action) {
  auto args = std::make_shared<WarpArgs>();
  auto* sub = app.add_subcommand("warp-eval", "Warp sampled frame pairs and score them with SSIM");
  sub->add_option("--session", args->session, "Session directory")->required();
  sub->add_option("--depth-source", args->sources, "Depth source to warp with (repeatable)")
      ->capture_default_str();
  sub->add_option("--reference-source", args->reference,
                  "Target depth for depth SSIM (default gt when present, else the warped source)");
  sub->add_option("--gaps", args->gaps, "Frame gaps, e.g. 10..100:10 or 1,5,10 (0 pairs a frame with itself)")
      ->capture_default_str();
  sub->add_option("--pairs-per-gap", args->pairs_per_gap, "Maximum sampled pairs per gap")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--mask", args->mask, "valid: SSIM over warped-valid pixels; full: whole image")
      ->capture_default_str()->check(CLI::IsMember({"valid", "full"}));
  sub->add_option("--out", args->out, "Aggregate CSV")->required();
  sub->add_option("--per-pair-out", args->per_pair_out, "Optional per-pair CSV");
  sub->add_option("--plot", args->plot, "Optional SVG of mean SSIM against gap");
  sub->add_option("--seed", args->seed, "Pair sampling seed")->capture_default_str();
  sub->add_option("--jobs", args->jobs, "Worker threads (0: all cores)")->capture_default_str();
  sub->add_option("--depth-range", args->depth_range, "Depth SSIM normalization range, meters")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--area-percentile", args->area_percentile, "Triangle area filter percentile")
      ->capture_default_str()->check(CLI::Range(0.0, 100.0));
  sub->footer(
      "Aggregate CSV columns: schema_version, gap, depth_source, mask, ssim_color, pairs, empty_pairs, "
      "then mean/median/p10/p90 of rgb_ssim, depth_ssim and overlap. Rows are sorted by gap, then "
      "depth_source.");
  sub->callback([&action, args] { action = [args] { run(*args); }; });
}

}  // namespace sparsear::cli

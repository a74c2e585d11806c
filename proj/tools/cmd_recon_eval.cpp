#include <iostream>
#include <memory>

#include "cli.hpp"
#include "sparsear/dataset.hpp"
#include "sparsear/error.hpp"
#include "sparsear/evaluation.hpp"
#include "sparsear/report.hpp"
#include "sparsear/synth.hpp"

namespace sparsear::cli {

namespace {

struct ReconArgs {
  std::string session;
  std::vector<std::string> sources{"gt"};
  std::string strides = "1";
  std::string method = "fused";
  double voxel = 0.02;
  int pixel_stride = 4;
  double icp_max_distance = 0.1;
  int icp_iterations = 50;
  std::string gt_cloud;
  bool synthetic_scene = false;
  std::vector<double> room{6.0, 3.0, 2.5};
  double gt_density = 10000.0;
  double margin = 0.05;
  std::string recon_ply;
  std::string out;
  bool timing = false;
  int jobs = 0;
};

void run(const ReconArgs& a) {
  if (a.gt_cloud.empty() == !a.synthetic_scene) {
    throw UsageError("give exactly one of --gt-cloud or --synthetic-scene");
  }
  if (a.room.size() != 3) throw UsageError("--room needs three values");
  ReconEvalOptions o;
  o.depth_sources = a.sources;
  o.strides = int_list_flag("--stride", a.strides);
  for (int s : o.strides) {
    if (s < 1) throw UsageError("--stride values must be >= 1");
  }
  o.reconstruction.pixel_stride = a.pixel_stride;
  o.reconstruction.jobs = a.jobs;
  if (a.method == "concat") {
    o.reconstruction.method = ConcatMerge{};
  } else if (a.method == "fused") {
    o.reconstruction.method = FusedMerge{a.voxel};
  } else {
    FusedIcpMerge m{a.voxel, {}};
    m.icp.max_correspondence_distance = a.icp_max_distance;
    m.icp.max_iterations = a.icp_iterations;
    o.reconstruction.method = m;
  }
  o.hausdorff.overlap_margin = a.margin;

  PointCloud gt;
  nlohmann::json gt_info;
  if (a.synthetic_scene) {
    const BoxScene scene = BoxScene::room(Vec3(a.room[0], a.room[1], a.room[2]));
    try {
      scene.validate();
    } catch (const InvalidInputError& e) {
      throw UsageError(e.what());
    }
    gt = scene_ground_truth_cloud(scene, a.gt_density);
    gt_info = {{"kind", "synthetic_scene"},
               {"room", a.room},
               {"density_per_m2", a.gt_density},
               {"points", gt.size()}};
  } else {
    gt = load_pointcloud_ply(a.gt_cloud);
    gt_info = {{"kind", "ply"}, {"path", a.gt_cloud}, {"points", gt.size()}};
  }

  const Session session = load_session(a.session);
  auto sink = [&](const ReconRecord& r, const PointCloud& cloud) {
    std::cerr << "recon-eval: " << r.depth_source << " stride " << r.stride << ": hausdorff "
              << r.hausdorff.distance << " m, " << r.runtime_s << " s\n";
    if (!a.recon_ply.empty()) {
      save_pointcloud_ply(cloud, std::filesystem::path(a.recon_ply) /
                                     (r.depth_source + "_stride" + std::to_string(r.stride) + ".ply"));
    }
  };
  if (!a.recon_ply.empty()) std::filesystem::create_directories(a.recon_ply);
  const auto records = evaluate_reconstruction(session, gt, o, sink);

  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "recon-eval";
  doc["session"] = a.session;
  doc["method"] = merge_method_name(o.reconstruction.method);
  doc["voxel_size"] = a.voxel;
  doc["pixel_stride"] = a.pixel_stride;
  doc["overlap_margin"] = a.margin;
  doc["ground_truth"] = gt_info;
  doc["units"] = "meters";
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j{{"depth_source", r.depth_source},
                     {"stride", r.stride},
                     {"frames_used", r.frames_used},
                     {"points", r.points},
                     {"hausdorff", r.hausdorff.distance},
                     {"directed_recon_to_gt", r.hausdorff.directed_ab},
                     {"directed_gt_to_recon", r.hausdorff.directed_ba},
                     {"recon_points_in_overlap", r.hausdorff.a_points_in_overlap},
                     {"gt_points_in_overlap", r.hausdorff.b_points_in_overlap},
                     {"skipped_clouds", r.skipped_clouds},
                     {"warnings", r.warnings}};
    if (a.timing) j["runtime_s"] = r.runtime_s;
    list.push_back(std::move(j));
  }
  doc["records"] = std::move(list);
  write_json(a.out, doc);
}

}  // namespace

void register_recon_eval(CLI::App& app, Action& action) {
  auto args = std::make_shared<ReconArgs>();
  auto* sub = app.add_subcommand("recon-eval",
                                 "Reconstruct at several frame strides and measure Hausdorff distance");
  sub->add_option("--session", args->session, "Session directory")->required();
  sub->add_option("--depth-source", args->sources, "Depth source (repeatable)")->capture_default_str();
  sub->add_option("--stride", args->strides, "Frame strides, e.g. 1,10..100:10")->capture_default_str();
  sub->add_option("--method", args->method, "concat, fused or fused_icp")
      ->capture_default_str()->check(CLI::IsMember({"concat", "fused", "fused_icp"}));
  sub->add_option("--voxel", args->voxel, "Voxel size, meters")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--pixel-stride", args->pixel_stride, "Use every n-th pixel in x and y")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--icp-max-distance", args->icp_max_distance, "ICP correspondence gate, meters")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--icp-iterations", args->icp_iterations, "ICP iteration cap")
      ->capture_default_str()->check(CLI::PositiveNumber);
  auto* gt = sub->add_option("--gt-cloud", args->gt_cloud, "Ground-truth PLY (points or mesh vertices)");
  auto* syn = sub->add_flag("--synthetic-scene", args->synthetic_scene,
                            "Use the analytic box-room surface as ground truth");
  gt->excludes(syn);
  sub->add_option("--room", args->room, "Synthetic room extents x,y,z")->capture_default_str()->delimiter(',')->expected(3);
  sub->add_option("--gt-density", args->gt_density, "Synthetic ground-truth samples per m^2")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--margin", args->margin, "Overlap bounding-box margin, meters")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--recon-ply", args->recon_ply, "Directory for reconstructed clouds");
  sub->add_option("--out", args->out, "Output JSON")->required();
  sub->add_flag("--timing", args->timing, "Include wall-clock runtime in the JSON");
  sub->add_option("--jobs", args->jobs, "Worker threads (0: all cores)")->capture_default_str();
  sub->callback([&action, args] { action = [args] { run(*args); }; });
}

}  // namespace sparsear::cli

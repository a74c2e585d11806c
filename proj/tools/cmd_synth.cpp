#include <cmath>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>

#include "cli.hpp"
#include "sparsear/dataset.hpp"
#include "sparsear/error.hpp"
#include "sparsear/synth.hpp"

namespace sparsear::cli {

namespace {

struct SynthArgs {
  std::string out;
  int frames = 56;
  std::string traj = "linear";
  double velocity = 0.05;
  std::vector<double> direction{1.0, 0.0, 0.0};
  double angular_rate = 0.02;
  double radius = 0.3;
  int frames_per_view = 100;
  std::vector<double> start{0.5, 1.0, 1.4};
  double yaw_deg = 45.0;
  double pitch_deg = 0.0;
  std::vector<double> room{6.0, 3.0, 2.5};
  int width = 160;
  int height = 120;
  double fx = 120.0;
  double fy = 120.0;
  double cx = NAN;
  double cy = NAN;
  double fps = 60.0;
  double noise_sigma = 0.0;
  double dropout = 0.0;
  std::uint64_t seed = 42;
  int jobs = 0;
};

Vec3 vec3(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) throw UsageError(std::string(name) + " needs three comma-separated values");
  return {v[0], v[1], v[2]};
}

void run(const SynthArgs& a) {
  const BoxScene scene = BoxScene::room(vec3(a.room, "--room"));
  const double cx = std::isnan(a.cx) ? 0.5 * (a.width - 1) : a.cx;
  const double cy = std::isnan(a.cy) ? 0.5 * (a.height - 1) : a.cy;
  std::optional<Intrinsics> k;
  try {
    k.emplace(a.fx, a.fy, cx, cy, a.width, a.height);
    scene.validate();
  } catch (const InvalidInputError& e) {
    throw UsageError(e.what());
  }
  if (a.noise_sigma < 0.0 || a.dropout < 0.0 || a.dropout > 1.0) {
    throw UsageError("--noise-sigma must be >= 0 and --dropout in [0, 1]");
  }

  TrajectorySpec spec;
  spec.frames = a.frames;
  spec.start = yaw_pitch_pose(vec3(a.start, "--start"), a.yaw_deg * std::numbers::pi / 180.0,
                              a.pitch_deg * std::numbers::pi / 180.0);
  if (a.traj == "linear") {
    spec.motion = LinearMotion{a.velocity, vec3(a.direction, "--direction")};
    if (vec3(a.direction, "--direction").norm() == 0.0) throw UsageError("--direction is zero");
  } else if (a.traj == "orbit") {
    spec.motion = OrbitMotion{a.angular_rate, a.radius};
  } else {
    spec.motion = ScriptedMotion{coverage_poses(scene, a.frames_per_view)};
  }

  GenerateOptions options;
  options.fps = a.fps;
  options.jobs = a.jobs;
  if (a.noise_sigma > 0.0 || a.dropout > 0.0) options.noise = NoiseSpec{a.noise_sigma, a.dropout, a.seed};
  const Session session = generate_session(scene, spec, *k, options);
  const SaveStats stats = save_session(session, a.out);
  if (stats.clamped_depth_values > 0) {
    warn(std::to_string(stats.clamped_depth_values) + " depth values clamped to 65.535 m");
  }
  std::cout << "wrote " << stats.frames_written << " frames (" << stats.depth_maps_written
            << " depth maps) to " << a.out << "\n";
}

}  // namespace

void register_synth(CLI::App& app, Action& action) {
  auto args = std::make_shared<SynthArgs>();
  auto* sub = app.add_subcommand("synth", "Render a synthetic box-room session");
  sub->add_option("--out", args->out, "Output session directory")->required();
  sub->add_option("--frames", args->frames, "Frame count (linear, orbit)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--traj", args->traj, "Trajectory: linear, orbit or coverage")
      ->capture_default_str()->check(CLI::IsMember({"linear", "orbit", "coverage"}));
  sub->add_option("--velocity", args->velocity, "Linear speed, meters per frame")->capture_default_str();
  sub->add_option("--direction", args->direction, "Linear motion direction x,y,z (world)")
      ->delimiter(',')->expected(3);
  sub->add_option("--angular-rate", args->angular_rate, "Orbit yaw rate, radians per frame")
      ->capture_default_str();
  sub->add_option("--radius", args->radius, "Orbit radius, meters")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--frames-per-view", args->frames_per_view,
                  "Coverage: frames held at each of the 14 views")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--start", args->start, "Start position x,y,z (linear, orbit)")
      ->delimiter(',')->expected(3);
  sub->add_option("--yaw", args->yaw_deg, "Start heading about world z, degrees")->capture_default_str();
  sub->add_option("--pitch", args->pitch_deg, "Start pitch, degrees (positive up)")->capture_default_str();
  sub->add_option("--room", args->room, "Room extents x,y,z in meters")->capture_default_str()->delimiter(',')->expected(3);
  sub->add_option("--width", args->width, "Image width")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--height", args->height, "Image height")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--fx", args->fx, "Focal length x, pixels")->capture_default_str();
  sub->add_option("--fy", args->fy, "Focal length y, pixels")->capture_default_str();
  sub->add_option("--cx", args->cx, "Principal point x (default image center)");
  sub->add_option("--cy", args->cy, "Principal point y (default image center)");
  sub->add_option("--fps", args->fps, "Nominal frame rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--noise-sigma", args->noise_sigma, "Adds a \"noisy\" depth source with this sigma, meters")
      ->capture_default_str();
  sub->add_option("--dropout", args->dropout, "Fraction of \"noisy\" pixels zeroed")->capture_default_str();
  sub->add_option("--seed", args->seed, "Noise seed")->capture_default_str();
  sub->add_option("--jobs", args->jobs, "Worker threads (0: all cores)")->capture_default_str();
  sub->callback([&action, args] { action = [args] { run(*args); }; });
}

}  // namespace sparsear::cli

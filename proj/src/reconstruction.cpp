#include "sparsear/reconstruction.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsear/error.hpp"
#include "sparsear/kdtree.hpp"
#include "sparsear/parallel.hpp"

namespace sparsear {

void IcpParams::validate() const {
  if (max_iterations <= 0 || !(max_correspondence_distance > 0.0) ||
      !(convergence_translation > 0.0) || !(convergence_rotation > 0.0)) {
    throw InvalidInputError("icp: all parameters must be positive");
  }
}

std::string merge_method_name(const MergeMethod& method) {
  switch (method.index()) {
    case 0:
      return "concat";
    case 1:
      return "fused";
    default:
      return "fused_icp";
  }
}

PointCloud frame_to_pointcloud(const Frame& frame, const std::string& depth_source,
                               const Intrinsics& k, int stride) {
  if (stride < 1) throw InvalidInputError("frame_to_pointcloud: stride must be >= 1");
  const DepthMap& depth = frame.depth(depth_source);
  if (depth.width() != k.width || depth.height() != k.height) {
    throw DimensionMismatchError(frame.index, "depth does not match intrinsics");
  }
  const bool colors = frame.rgb.width() == k.width && frame.rgb.height() == k.height;
  PointCloud cloud;
  for (int y = 0; y < k.height; y += stride) {
    for (int x = 0; x < k.width; x += stride) {
      const double d = depth.at(x, y);
      if (!(d > 0.0)) continue;
      cloud.points.push_back(frame.pose.apply(unproject({double(x), double(y)}, d, k)));
      if (colors) cloud.colors.push_back(frame.rgb.at(x, y));
    }
  }
  return cloud;
}

namespace {

/// Centroid fusion over several clouds without concatenating them first.
PointCloud fuse_parts(const std::vector<const PointCloud*>& parts, double voxel_size) {
  if (!(voxel_size > 0.0)) throw InvalidInputError("voxel_fuse: voxel_size must be positive");
  struct Entry {
    std::int32_t kx, ky, kz;
    std::uint32_t part;
    std::uint32_t index;
  };
  std::size_t total = 0;
  bool colors = true;
  for (const PointCloud* c : parts) {
    total += c->size();
    if (c->size() > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidInputError("voxel_fuse: too many points in one cloud");
    }
    if (!c->empty() && !c->has_colors()) colors = false;
  }
  if (parts.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInputError("voxel_fuse: too many clouds");
  }
  if (total == 0) return {};

  std::vector<Entry> entries;
  entries.reserve(total);
  constexpr double kLimit = 2.0e9;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const auto& pts = parts[c]->points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec3 q = (pts[i] / voxel_size).array().floor();
      if (!q.allFinite() || q.cwiseAbs().maxCoeff() > kLimit) {
        throw InvalidInputError("voxel_fuse: coordinates out of range for voxel size");
      }
      entries.push_back({static_cast<std::int32_t>(q.x()), static_cast<std::int32_t>(q.y()),
                         static_cast<std::int32_t>(q.z()), static_cast<std::uint32_t>(c),
                         static_cast<std::uint32_t>(i)});
    }
  }
  auto point = [&](const Entry& e) -> const Vec3& { return parts[e.part]->points[e.index]; };
  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.kx != b.kx) return a.kx < b.kx;
    if (a.ky != b.ky) return a.ky < b.ky;
    if (a.kz != b.kz) return a.kz < b.kz;
    const Vec3& pa = point(a);
    const Vec3& pb = point(b);
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.z() < pb.z();
  });

  PointCloud out;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin + 1;
    while (end < entries.size() && entries[end].kx == entries[begin].kx &&
           entries[end].ky == entries[begin].ky && entries[end].kz == entries[begin].kz) {
      ++end;
    }
    Vec3 sum = Vec3::Zero();
    Vec3 color_sum = Vec3::Zero();
    for (std::size_t i = begin; i < end; ++i) {
      sum += point(entries[i]);
      if (colors) {
        const Rgb8& c = parts[entries[i].part]->colors[entries[i].index];
        color_sum += Vec3(c[0], c[1], c[2]);
      }
    }
    const double n = static_cast<double>(end - begin);
    out.points.push_back(sum / n);
    if (colors) {
      const Vec3 c = (color_sum / n).array().round();
      out.colors.push_back({static_cast<std::uint8_t>(c.x()), static_cast<std::uint8_t>(c.y()),
                            static_cast<std::uint8_t>(c.z())});
    }
    begin = end;
  }
  return out;
}

}  // namespace

PointCloud voxel_fuse(const PointCloud& cloud, double voxel_size) {
  return fuse_parts({&cloud}, voxel_size);
}

RelativeTransform best_fit_transform(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw InvalidInputError("best_fit_transform: need at least three matched pairs");
  }
  const double n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero();
  Vec3 cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Mat3 r = v * d * u.transpose();
  // Re-orthonormalize to keep the pose invariant tight after SVD rounding.
  const Eigen::JacobiSVD<Mat3> polar(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = polar.matrixU() * polar.matrixV().transpose();
  return RelativeTransform(r, cd - r * cs);
}

IcpResult icp_align(const PointCloud& src, const PointCloud& dst, const RelativeTransform& init,
                    const IcpParams& params) {
  params.validate();
  if (src.size() < 3 || dst.size() < 3) {
    throw DegenerateRegistrationError(0, std::min(src.size(), dst.size()));
  }
  const KdTree tree(dst.points);
  const double gate_sq = params.max_correspondence_distance * params.max_correspondence_distance;

  std::vector<Vec3> matched_src;
  std::vector<Vec3> matched_dst;
  double sq_sum = 0.0;
  auto correspond = [&](const RelativeTransform& t) {
    matched_src.clear();
    matched_dst.clear();
    sq_sum = 0.0;
    for (const Vec3& p : src.points) {
      const auto nn = tree.nearest(t.apply(p));
      if (nn.squared_distance <= gate_sq) {
        matched_src.push_back(p);
        matched_dst.push_back(dst.points[nn.index]);
        sq_sum += nn.squared_distance;
      }
    }
  };

  IcpResult result;
  result.transform = init;
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    correspond(result.transform);
    if (matched_src.size() < 3) throw DegenerateRegistrationError(iter, matched_src.size());
    const RelativeTransform next = best_fit_transform(matched_src, matched_dst);
    const Mat3 dr = next.rotation() * result.transform.rotation().transpose();
    const Vec3 dt = next.translation() - dr * result.transform.translation();
    result.transform = next;
    result.iterations = iter;
    if (dt.norm() < params.convergence_translation && so3_log_angle(dr) < params.convergence_rotation) {
      result.converged = true;
      break;
    }
  }
  correspond(result.transform);
  if (matched_src.size() < 3) {
    throw DegenerateRegistrationError(result.iterations, matched_src.size());
  }
  result.correspondences = matched_src.size();
  result.rmse = std::sqrt(sq_sum / static_cast<double>(matched_src.size()));
  return result;
}

namespace {

PointCloud transformed(const PointCloud& cloud, const RelativeTransform& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t.apply(p);
  return out;
}

}  // namespace

MergeResult merge_clouds(const std::vector<PointCloud>& clouds, const MergeMethod& method) {
  if (clouds.empty()) throw InvalidInputError("merge_clouds: no input clouds");
  MergeResult result;
  if (std::holds_alternative<ConcatMerge>(method)) {
    std::size_t total = 0;
    for (const auto& c : clouds) total += c.size();
    result.cloud.points.reserve(total);
    for (const auto& c : clouds) result.cloud.append(c);
    return result;
  }
  if (const auto* fused = std::get_if<FusedMerge>(&method)) {
    std::vector<const PointCloud*> parts;
    for (const auto& c : clouds) parts.push_back(&c);
    result.cloud = fuse_parts(parts, fused->voxel_size);
    return result;
  }

  const auto& cfg = std::get<FusedIcpMerge>(method);
  PointCloud aligned = clouds.front();
  PointCloud model = voxel_fuse(aligned, cfg.voxel_size);
  for (std::size_t i = 1; i < clouds.size(); ++i) {
    try {
      const IcpResult reg = icp_align(clouds[i], model, RelativeTransform::identity(), cfg.icp);
      const PointCloud moved = transformed(clouds[i], reg.transform);
      aligned.append(moved);
      model = fuse_parts({&model, &moved}, cfg.voxel_size);
    } catch (const DegenerateRegistrationError& e) {
      result.skipped.push_back(i);
      result.warnings.push_back("cloud " + std::to_string(i) + " skipped: " + e.what());
    }
  }
  result.cloud = voxel_fuse(aligned, cfg.voxel_size);
  return result;
}

MergeResult reconstruct_session(const Session& session, const std::string& depth_source,
                                const ReconstructionOptions& options) {
  if (options.frame_stride < 1) throw InvalidInputError("reconstruct_session: frame_stride must be >= 1");
  if (session.frames.empty()) throw InvalidInputError("reconstruct_session: empty session");
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < session.size(); i += static_cast<std::size_t>(options.frame_stride)) {
    picked.push_back(i);
  }
  std::vector<PointCloud> clouds(picked.size());
  parallel_for(picked.size(), options.jobs, [&](std::size_t i) {
    clouds[i] = frame_to_pointcloud(session.frames[picked[i]], depth_source, session.intrinsics,
                                    options.pixel_stride);
  });
  return merge_clouds(clouds, options.method);
}

}  // namespace sparsear

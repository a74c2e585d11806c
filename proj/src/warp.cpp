#include "sparsear/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsear/error.hpp"

namespace sparsear {

std::size_t ScreenSpaceMesh::valid_vertex_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw InvalidInputError("percentile of an empty list");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw InvalidInputError("percentile must lie in (0, 100]");
  }
  const auto n = values.size();
  // Guard the product against representation error (95 * n / 100 etc.).
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(n) / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

ScreenSpaceMesh build_screen_space_mesh(const DepthMap& depth, const RgbImage& rgb,
                                        const Intrinsics& k, double area_percentile) {
  if (depth.width() != k.width || depth.height() != k.height || rgb.width() != k.width ||
      rgb.height() != k.height) {
    throw InvalidInputError("build_screen_space_mesh: depth/rgb/intrinsics sizes disagree");
  }
  if (!(area_percentile > 0.0 && area_percentile <= 100.0)) {
    throw InvalidInputError("build_screen_space_mesh: area_percentile must lie in (0, 100]");
  }
  const int w = k.width;
  const int h = k.height;
  ScreenSpaceMesh mesh;
  mesh.width = w;
  mesh.height = h;
  mesh.vertices.assign(depth.size(), Vec3::Zero());
  mesh.colors = rgb.values();
  mesh.valid.assign(depth.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = depth.index(x, y);
      const double d = depth[i];
      if (d > 0.0 && std::isfinite(d)) {
        mesh.vertices[i] = unproject({double(x), double(y)}, d, k);
        mesh.valid[i] = 1;
      }
    }
  }

  std::vector<Triangle> candidates;
  std::vector<double> areas;
  if (w >= 2 && h >= 2) {
    candidates.reserve(2 * static_cast<std::size_t>(w - 1) * (h - 1));
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      const int tl = y * w + x;
      const int tr = tl + 1;
      const int bl = tl + w;
      const int br = bl + 1;
      if (!mesh.valid[tl] || !mesh.valid[tr] || !mesh.valid[bl] || !mesh.valid[br]) continue;
      candidates.push_back({tl, tr, br});
      candidates.push_back({tl, br, bl});
    }
  }
  areas.reserve(candidates.size());
  for (const auto& t : candidates) {
    areas.push_back(triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  mesh.candidate_triangles = candidates.size();
  if (candidates.empty()) return mesh;

  mesh.area_threshold = nearest_rank_percentile(areas, area_percentile);
  const double limit = mesh.area_threshold * (1.0 + kAreaTieTolerance);
  mesh.triangles.reserve(candidates.size());
  mesh.areas.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (areas[i] > limit) continue;
    mesh.triangles.push_back(candidates[i]);
    mesh.areas.push_back(areas[i]);
  }
  return mesh;
}

namespace {

struct ClipVertex {
  Vec3 pos;
  Vec3 attr;
};

struct ScreenVertex {
  double x;
  double y;
  double inv_z;
  Vec3 attr_over_z;
};

bool lex_less(const ScreenVertex& a, const ScreenVertex& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

/// Edge function evaluated with canonically ordered endpoints so that the
/// two triangles sharing an edge get exactly opposite values.
double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  if (lex_less(b, a)) {
    return -((a.x - b.x) * (py - b.y) - (a.y - b.y) * (px - b.x));
  }
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

/// An edge a->b of a positively oriented triangle owns pixels lying
/// exactly on it when it is a top edge or a left edge.
bool is_top_left(const ScreenVertex& a, const ScreenVertex& b) {
  return (a.y == b.y && b.x > a.x) || (a.y > b.y);
}

class Raster {
 public:
  Raster(const Intrinsics& k, bool with_color)
      : k_(k), with_color_(with_color),
        zbuf_(k.pixel_count(), std::numeric_limits<double>::infinity()),
        color_(with_color ? k.pixel_count() : 0, Vec3::Zero()) {}

  void draw(const ClipVertex& a, const ClipVertex& b, const ClipVertex& c) {
    const int inside = (a.pos.z() > kNearPlane) + (b.pos.z() > kNearPlane) + (c.pos.z() > kNearPlane);
    if (inside == 0) return;
    if (inside == 3) {
      draw_screen(a, b, c);
      return;
    }
    // Sutherland-Hodgman against z = near; attributes are affine in 3D.
    const ClipVertex in[3] = {a, b, c};
    ClipVertex out[4];
    int n = 0;
    for (int i = 0; i < 3; ++i) {
      const ClipVertex& cur = in[i];
      const ClipVertex& nxt = in[(i + 1) % 3];
      const bool cur_in = cur.pos.z() > kNearPlane;
      const bool nxt_in = nxt.pos.z() > kNearPlane;
      if (cur_in) out[n++] = cur;
      if (cur_in != nxt_in) {
        const double t = (kNearPlane - cur.pos.z()) / (nxt.pos.z() - cur.pos.z());
        ClipVertex v{cur.pos + t * (nxt.pos - cur.pos), cur.attr + t * (nxt.attr - cur.attr)};
        v.pos.z() = kNearPlane;
        out[n++] = v;
      }
    }
    for (int i = 1; i + 1 < n; ++i) draw_screen(out[0], out[i], out[i + 1]);
  }

  /// Single-pixel point at the rounded projection, only into pixels that no
  /// triangle has covered. Requires begin_points().
  void draw_point(const ClipVertex& v) {
    if (!(v.pos.z() > kNearPlane)) return;
    const double u = k_.fx * v.pos.x() / v.pos.z() + k_.cx;
    const double w = k_.fy * v.pos.y() / v.pos.z() + k_.cy;
    if (!(u > -0.5 && w > -0.5 && u < k_.width - 0.5 && w < k_.height - 0.5)) return;
    const int x = static_cast<int>(std::floor(u + 0.5));
    const int y = static_cast<int>(std::floor(w + 0.5));
    if (x < 0 || y < 0 || x >= k_.width || y >= k_.height) return;
    const std::size_t i = static_cast<std::size_t>(y) * k_.width + x;
    if (std::isfinite(zbuf_[i]) && !from_point_[i]) return;
    if (v.pos.z() < zbuf_[i]) {
      zbuf_[i] = v.pos.z();
      from_point_[i] = 1;
      if (with_color_) color_[i] = v.attr;
    }
  }

  /// Marks the start of the point pass: existing fragments become final.
  void begin_points() {
    from_point_.assign(k_.pixel_count(), 0);
  }

  WarpResult finish() const {
    WarpResult r;
    r.rgb = RgbImage(k_.width, k_.height, Rgb8{0, 0, 0});
    r.depth = DepthMap(k_.width, k_.height, 0.0);
    r.valid_mask = Mask(k_.width, k_.height, 0);
    for (std::size_t i = 0; i < zbuf_.size(); ++i) {
      if (!std::isfinite(zbuf_[i])) continue;
      r.depth[i] = zbuf_[i];
      r.valid_mask[i] = 1;
      ++r.valid_pixels;
      if (with_color_) {
        for (int ch = 0; ch < 3; ++ch) {
          r.rgb[i][ch] = static_cast<std::uint8_t>(std::clamp(std::round(color_[i][ch]), 0.0, 255.0));
        }
      }
    }
    r.overlap_ratio = static_cast<double>(r.valid_pixels) / static_cast<double>(zbuf_.size());
    return r;
  }

 private:
  ScreenVertex to_screen(const ClipVertex& v) const {
    const double inv_z = 1.0 / v.pos.z();
    return {k_.fx * v.pos.x() * inv_z + k_.cx, k_.fy * v.pos.y() * inv_z + k_.cy, inv_z,
            v.attr * inv_z};
  }

  void draw_screen(const ClipVertex& a, const ClipVertex& b, const ClipVertex& c) {
    ScreenVertex v0 = to_screen(a);
    ScreenVertex v1 = to_screen(b);
    ScreenVertex v2 = to_screen(c);
    double area = edge(v1, v2, v0.x, v0.y);
    if (area == 0.0 || !std::isfinite(area)) return;
    if (area < 0.0) std::swap(v1, v2);

    const double min_x = std::min({v0.x, v1.x, v2.x});
    const double max_x = std::max({v0.x, v1.x, v2.x});
    const double min_y = std::min({v0.y, v1.y, v2.y});
    const double max_y = std::max({v0.y, v1.y, v2.y});
    const int x0 = static_cast<int>(std::ceil(std::clamp(min_x, -1.0, double(k_.width))));
    const int x1 = static_cast<int>(std::floor(std::clamp(max_x, -1.0, double(k_.width - 1))));
    const int y0 = static_cast<int>(std::ceil(std::clamp(min_y, -1.0, double(k_.height))));
    const int y1 = static_cast<int>(std::floor(std::clamp(max_y, -1.0, double(k_.height - 1))));
    const bool tl0 = is_top_left(v1, v2);
    const bool tl1 = is_top_left(v2, v0);
    const bool tl2 = is_top_left(v0, v1);
    for (int y = std::max(y0, 0); y <= y1; ++y) {
      const double py = y;
      for (int x = std::max(x0, 0); x <= x1; ++x) {
        const double px = x;
        const double e0 = edge(v1, v2, px, py);
        const double e1 = edge(v2, v0, px, py);
        const double e2 = edge(v0, v1, px, py);
        if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
        if ((e0 == 0.0 && !tl0) || (e1 == 0.0 && !tl1) || (e2 == 0.0 && !tl2)) continue;
        const double sum = e0 + e1 + e2;
        const double w0 = e0 / sum;
        const double w1 = e1 / sum;
        const double w2 = e2 / sum;
        const double inv_z = w0 * v0.inv_z + w1 * v1.inv_z + w2 * v2.inv_z;
        const double z = 1.0 / inv_z;
        const std::size_t i = static_cast<std::size_t>(y) * k_.width + x;
        if (!(z < zbuf_[i])) continue;
        zbuf_[i] = z;
        if (with_color_) {
          color_[i] = (w0 * v0.attr_over_z + w1 * v1.attr_over_z + w2 * v2.attr_over_z) * z;
        }
      }
    }
  }

  const Intrinsics& k_;
  bool with_color_;
  std::vector<double> zbuf_;
  std::vector<Vec3> color_;
  std::vector<std::uint8_t> from_point_;
};

Vec3 color_attr(const std::vector<Rgb8>& colors, std::size_t i) {
  if (colors.empty()) return Vec3::Zero();
  return {double(colors[i][0]), double(colors[i][1]), double(colors[i][2])};
}

}  // namespace

WarpResult rasterize(const TargetMesh& mesh, const Intrinsics& k) {
  const bool with_color = !mesh.colors.empty();
  if (with_color && mesh.colors.size() != mesh.vertices.size()) {
    throw InvalidInputError("rasterize: colors must match vertices");
  }
  Raster raster(k, with_color);
  const auto n = static_cast<int>(mesh.vertices.size());
  for (const auto& t : mesh.triangles) {
    if (t[0] < 0 || t[1] < 0 || t[2] < 0 || t[0] >= n || t[1] >= n || t[2] >= n) {
      throw InvalidInputError("rasterize: triangle index out of range");
    }
    raster.draw({mesh.vertices[t[0]], color_attr(mesh.colors, t[0])},
                {mesh.vertices[t[1]], color_attr(mesh.colors, t[1])},
                {mesh.vertices[t[2]], color_attr(mesh.colors, t[2])});
  }
  return raster.finish();
}

WarpResult warp_mesh(const ScreenSpaceMesh& mesh, const RelativeTransform& src_to_dst,
                     const Intrinsics& k, bool with_color) {
  std::vector<ClipVertex> transformed(mesh.vertices.size());
  std::size_t source_valid = 0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!mesh.valid[i]) continue;
    ++source_valid;
    transformed[i].pos = src_to_dst.apply(mesh.vertices[i]);
    if (with_color) transformed[i].attr = color_attr(mesh.colors, i);
  }
  Raster raster(k, with_color);
  for (const auto& t : mesh.triangles) {
    raster.draw(transformed[t[0]], transformed[t[1]], transformed[t[2]]);
  }
  raster.begin_points();
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    if (mesh.valid[i]) raster.draw_point(transformed[i]);
  }
  WarpResult r = raster.finish();
  r.source_valid_pixels = source_valid;
  return r;
}

WarpResult warp_frame(const Frame& src, const std::string& depth_source, const PoseSE3& dst_pose,
                      const Intrinsics& k, double area_percentile) {
  return FrameWarper(src, depth_source, k, area_percentile).warp_to(dst_pose);
}

double overlap_ratio(const Frame& src, const std::string& depth_source, const PoseSE3& dst_pose,
                     const Intrinsics& k, double area_percentile) {
  return FrameWarper(src, depth_source, k, area_percentile).overlap_to(dst_pose);
}

FrameWarper::FrameWarper(const Frame& src, const std::string& depth_source, const Intrinsics& k,
                         double area_percentile)
    : mesh_(build_screen_space_mesh(src.depth(depth_source), src.rgb, k, area_percentile)),
      src_pose_(src.pose),
      k_(k) {}

WarpResult FrameWarper::warp_to(const PoseSE3& dst_pose) const {
  return warp_mesh(mesh_, relative_transform(src_pose_, dst_pose), k_, true);
}

double FrameWarper::overlap_to(const PoseSE3& dst_pose) const {
  return warp_mesh(mesh_, relative_transform(src_pose_, dst_pose), k_, false).overlap_ratio;
}

}  // namespace sparsear

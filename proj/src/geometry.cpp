#include "sparsear/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsear/error.hpp"

namespace sparsear {

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_, int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidInputError("intrinsics: focal lengths must be positive and finite");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw InvalidInputError("intrinsics: principal point outside the image");
  }
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 Intrinsics::inverse_matrix() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

namespace detail {

void validate_rotation(const Mat3& r) {
  if (!r.allFinite()) {
    throw InvalidInputError("rotation has non-finite entries");
  }
  const Mat3 gram = r.transpose() * r - Mat3::Identity();
  if (gram.cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidInputError("rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-9) {
    throw InvalidInputError("rotation determinant is not +1");
  }
}

}  // namespace detail

Vec3 unproject(PixelCoord p, double depth, const Intrinsics& k) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidInputError("unproject: depth must be positive, got " + std::to_string(depth));
  }
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    throw InvalidInputError("unproject: non-finite pixel");
  }
  return {depth * (p.u - k.cx) / k.fx, depth * (p.v - k.cy) / k.fy, depth};
}

Projection project(const Vec3& point, const Intrinsics& k) {
  if (!(point.z() > 0.0)) {
    throw BehindCameraError("project: point is behind the camera (z = " +
                            std::to_string(point.z()) + ")");
  }
  return {{k.fx * point.x() / point.z() + k.cx, k.fy * point.y() / point.z() + k.cy}, point.z()};
}

RelativeTransform relative_transform(const PoseSE3& src, const PoseSE3& dst) {
  const Mat3 dst_rt = dst.rotation().transpose();
  return RelativeTransform(dst_rt * src.rotation(),
                           dst_rt * (src.translation() - dst.translation()));
}

double so3_log_angle(const Mat3& r) {
  const Vec3 axis_sin(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_angle = 0.5 * axis_sin.norm();
  const double cos_angle = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  return std::atan2(sin_angle, cos_angle);
}

double se3_geodesic(const PoseSE3& a, const PoseSE3& b, double rho) {
  if (!(rho > 0.0)) {
    throw InvalidInputError("se3_geodesic: rho must be positive");
  }
  const double theta = so3_log_angle(a.rotation().transpose() * b.rotation());
  const double dist = (b.translation() - a.translation()).norm() / rho;
  return std::sqrt(theta * theta + dist * dist);
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) {
    throw InvalidInputError("axis_angle: zero axis");
  }
  return Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
}

PoseSE3 look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    throw InvalidInputError("look_at: view direction parallel to up vector");
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return PoseSE3(r, eye);
}

}  // namespace sparsear

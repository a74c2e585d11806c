#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <utility>

namespace sparsear {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Pinhole camera. Pixel centers sit on integer coordinates, origin top-left.
struct Intrinsics {
  double fx{};
  double fy{};
  double cx{};
  double cy{};
  int width{};
  int height{};

  /// Throws InvalidInputError when fx/fy/size are non-positive or the
  /// principal point lies outside the image.
  Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

  Mat3 matrix() const;
  Mat3 inverse_matrix() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1;
  }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

namespace detail {

void validate_rotation(const Mat3& r);

/// Rigid transform x -> R x + t. The tag keeps poses and relative
/// transforms from being mixed up.
template <class Tag>
class Rigid {
 public:
  Rigid() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws InvalidInputError unless R^T R = I and det R = +1 within 1e-9.
  Rigid(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    validate_rotation(rotation_);
  }

  static Rigid identity() { return Rigid(); }

  static Rigid from_matrix(const Mat4& m) {
    return Rigid(m.template topLeftCorner<3, 3>(), m.template topRightCorner<3, 1>());
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.template topLeftCorner<3, 3>() = rotation_;
    m.template topRightCorner<3, 1>() = translation_;
    return m;
  }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

  Rigid inverse() const {
    Rigid out;
    out.rotation_ = rotation_.transpose();
    out.translation_ = -(out.rotation_ * translation_);
    return out;
  }

  Rigid operator*(const Rigid& rhs) const {
    Rigid out;
    out.rotation_ = rotation_ * rhs.rotation_;
    out.translation_ = rotation_ * rhs.translation_ + translation_;
    return out;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

struct CameraToWorldTag {};
struct SourceToTargetTag {};

}  // namespace detail

/// Camera-to-world pose: maps camera-frame points into the world frame.
using PoseSE3 = detail::Rigid<detail::CameraToWorldTag>;

/// Maps source-camera-frame points into the target-camera frame.
using RelativeTransform = detail::Rigid<detail::SourceToTargetTag>;

struct PixelCoord {
  double u{};
  double v{};
};

/// Back-projects a pixel with metric z-depth into the camera frame.
Vec3 unproject(PixelCoord p, double depth, const Intrinsics& k);

struct Projection {
  PixelCoord pixel;
  double depth{};
};

/// Throws BehindCameraError when point.z <= 0.
Projection project(const Vec3& point, const Intrinsics& k);

RelativeTransform relative_transform(const PoseSE3& src, const PoseSE3& dst);

/// Rotation angle of r in [0, pi].
double so3_log_angle(const Mat3& r);

/// sqrt(theta^2 + |t_b - t_a|^2 / rho^2), theta the angle of R_a^T R_b.
double se3_geodesic(const PoseSE3& a, const PoseSE3& b, double rho = 1.0);

/// Rodrigues rotation about a (not necessarily unit) axis.
Mat3 axis_angle(const Vec3& axis, double angle);

/// Camera-to-world pose at `eye` looking at `target`; camera y points
/// away from `up` (image rows grow downwards).
PoseSE3 look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace sparsear

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "edgegeo/common.hpp"

namespace edgegeo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Pinhole intrinsics. Pixel (i, j) has continuous coordinate (i, j); no
/// half-pixel offset anywhere.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;

  /// Viewing ray (unit z component) through continuous pixel (u, v).
  Vec3 ray(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy, 1.0}; }

  /// Intrinsics of the 2x2 box-downsampled image. Output pixel j covers
  /// input pixels 2j and 2j+1, so its center sits at input coordinate
  /// 2j + 0.5; solving for the same viewing rays gives f/2 and (c - 0.5)/2.
  Intrinsics half() const { return {fx * 0.5, fy * 0.5, (cx - 0.5) * 0.5, (cy - 0.5) * 0.5}; }

  /// Intrinsics after `levels` halvings.
  Intrinsics at_level(int level) const;
};

/// Continuous image coordinate, origin top-left, x right, y down.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

Mat3 skew(const Vec3& v);

/// Rodrigues rotation from a rotation vector; Taylor branch below |w| = 1e-6.
Mat3 rodrigues(const Vec3& w);

/// Rotation vector of R; valid for angles below pi.
Vec3 rodrigues_log(const Mat3& R);

/// Right Jacobian of SO(3): rodrigues(w + dw) ~ rodrigues(w) * rodrigues(Jr(w) dw).
Mat3 so3_right_jacobian(const Vec3& w);

/// Rigid transform. The optimization chart is a 6-vector twist
/// (rotation vector, translation); exp applies Rodrigues to the first
/// three components and takes the last three as the translation.
struct PoseSE3 {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static PoseSE3 identity() { return {}; }
  static PoseSE3 exp(const Vec6& twist);
  Vec6 log() const;

  PoseSE3 inverse() const;
  PoseSE3 operator*(const PoseSE3& rhs) const;
  Vec3 apply(const Vec3& x) const { return R * x + t; }
};

/// phi(p) = depth * K^-1 * h(p). Throws on non-positive or non-finite depth.
Vec3 back_project(PixelCoord p, double depth, const Intrinsics& K);

/// Perspective projection. Throws on z <= 0 (behind the camera); hot paths
/// check z themselves and treat such pixels as flown out.
PixelCoord project(const Vec3& x, const Intrinsics& K);

}  // namespace edgegeo

#include "edgegeo/geometry.hpp"

#include <cmath>

namespace edgegeo {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw validation_error("invalid intrinsics: fx, fy must be positive and finite");
  }
}

Intrinsics Intrinsics::at_level(int level) const {
  Intrinsics k = *this;
  for (int i = 0; i < level; ++i) k = k.half();
  return k;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

namespace {

// sin(t)/t and (1-cos(t))/t^2 with Taylor branches below |t| = 1e-6.
// The two branches agree at the switch point to ~1e-12 relative.
void rotation_coeffs(double theta, double& a, double& b) {
  const double t2 = theta * theta;
  if (theta < 1e-6) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / t2;
  }
}

}  // namespace

Mat3 rodrigues(const Vec3& w) {
  const double theta = w.norm();
  double a, b;
  rotation_coeffs(theta, a, b);
  const Mat3 wx = skew(w);
  return Mat3::Identity() + a * wx + b * wx * wx;
}

Vec3 rodrigues_log(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  Vec3 v(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-6) {
    // v = 2 a w; a ~ 1 - theta^2/6
    return 0.5 * v * (1.0 + theta * theta / 6.0);
  }
  return v * (theta / (2.0 * std::sin(theta)));
}

Mat3 so3_right_jacobian(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 wx = skew(w);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * wx + (1.0 / 6.0) * wx * wx;
  }
  const double t2 = theta * theta;
  const double c1 = (1.0 - std::cos(theta)) / t2;
  const double c2 = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() - c1 * wx + c2 * wx * wx;
}

PoseSE3 PoseSE3::exp(const Vec6& twist) {
  PoseSE3 T;
  T.R = rodrigues(twist.head<3>());
  T.t = twist.tail<3>();
  return T;
}

Vec6 PoseSE3::log() const {
  Vec6 twist;
  twist.head<3>() = rodrigues_log(R);
  twist.tail<3>() = t;
  return twist;
}

PoseSE3 PoseSE3::inverse() const {
  PoseSE3 T;
  T.R = R.transpose();
  T.t = -T.R * t;
  return T;
}

PoseSE3 PoseSE3::operator*(const PoseSE3& rhs) const {
  PoseSE3 T;
  T.R = R * rhs.R;
  T.t = R * rhs.t + t;
  return T;
}

Vec3 back_project(PixelCoord p, double depth, const Intrinsics& K) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw std::domain_error("back_project: depth must be positive and finite");
  }
  return depth * K.ray(p.u, p.v);
}

PixelCoord project(const Vec3& x, const Intrinsics& K) {
  if (!(x.z() > 0.0)) {
    throw std::domain_error("project: point is behind the camera (z <= 0)");
  }
  return {K.fx * x.x() / x.z() + K.cx, K.fy * x.y() / x.z() + K.cy};
}

}  // namespace edgegeo

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gemini/attribute.hpp"

namespace gemini {

inline Mat3 rotation_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

/// Extrinsic roll-pitch-yaw (x, then y, then z about fixed axes): Rz * Ry * Rx.
inline Mat3 rotation_rpy(double roll, double pitch, double yaw) {
  const Mat3 rx = Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(pitch, Vec3::UnitY()).toRotationMatrix();
  const Mat3 rz = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  return rz * ry * rx;
}

inline Mat4 make_transform(const Mat3& rotation, const Vec3& translation) {
  Mat4 t = Mat4::Identity();
  t.block<3, 3>(0, 0) = rotation;
  t.block<3, 1>(0, 3) = translation;
  return t;
}

inline Mat3 rotation_of(const Mat4& t) { return t.block<3, 3>(0, 0); }
inline Vec3 translation_of(const Mat4& t) { return t.block<3, 1>(0, 3); }

/// Bottom row (0,0,0,1) and orthonormal rotation block.
inline bool is_rigid_transform(const Mat4& t, double tol = 1e-9) {
  if (t(3, 0) != 0.0 || t(3, 1) != 0.0 || t(3, 2) != 0.0 || t(3, 3) != 1.0) return false;
  const Mat3 r = rotation_of(t);
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

inline std::vector<Vec3> transform_points(const Mat4& t, const std::vector<Vec3>& points) {
  const Mat3 r = rotation_of(t);
  const Vec3 p = translation_of(t);
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(r * x + p);
  return out;
}

/// Wraps an angle to (-pi, pi]. Values already in range are returned unchanged.
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  if (a > -pi && a <= pi) return a;
  double w = std::remainder(a, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

}  // namespace gemini

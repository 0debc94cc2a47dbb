// Copyright 2026 The TriCal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trical/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace trical {

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::operator*(const Quaternion& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Vec3 Quaternion::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u(x, y, z);
  const Vec3 c = u.cross(v);
  return v + 2.0 * w * c + 2.0 * u.cross(c);
}

Mat3 Quaternion::to_matrix() const {
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quaternion quat_normalize(const Quaternion& q) {
  const double n = q.norm();
  require(n > 0.0 && std::isfinite(n), ErrorCode::kDegenerate, "degenerate quaternion");
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

bool is_unit(const Quaternion& q, double tol) { return std::abs(q.norm() - 1.0) <= tol; }

double angular_distance_rad(const Quaternion& a, const Quaternion& b) {
  require(is_unit(a) && is_unit(b), ErrorCode::kInvalidArgument,
          "angular_distance: non-unit quaternion");
  // a^-1 b, grouped so that equal inputs cancel exactly.
  const Vec3 u(a.x, a.y, a.z), v(b.x, b.y, b.z);
  const Vec3 r = (a.w * v - b.w * u) - u.cross(v);
  return 2.0 * std::atan2(r.norm(), std::abs(a.dot(b)));
}

double angular_distance(const Quaternion& a, const Quaternion& b) {
  return rad2deg(angular_distance_rad(a, b));
}

Quaternion euler_to_quat(double roll_deg, double pitch_deg, double yaw_deg) {
  const double hr = 0.5 * deg2rad(roll_deg);
  const double hp = 0.5 * deg2rad(pitch_deg);
  const double hy = 0.5 * deg2rad(yaw_deg);
  const Quaternion qx{std::cos(hr), std::sin(hr), 0.0, 0.0};
  const Quaternion qy{std::cos(hp), 0.0, std::sin(hp), 0.0};
  const Quaternion qz{std::cos(hy), 0.0, 0.0, std::sin(hy)};
  return quat_normalize(qz * qy * qx);
}

EulerAngles quat_to_euler(const Quaternion& q) {
  require(is_unit(q), ErrorCode::kInvalidArgument, "quat_to_euler: non-unit quaternion");
  const Mat3 r = q.to_matrix();
  EulerAngles e;
  const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  if (std::abs(std::abs(rad2deg(pitch)) - 90.0) < 1e-6) {
    // Only roll - sign*yaw is observable; yaw is pinned to 0.
    e.gimbal_lock = true;
    e.pitch = pitch > 0 ? 90.0 : -90.0;
    e.yaw = 0.0;
    e.roll = rad2deg(std::atan2(pitch > 0 ? r(0, 1) : -r(0, 1), r(1, 1)));
    return e;
  }
  e.pitch = rad2deg(pitch);
  e.roll = rad2deg(std::atan2(r(2, 1), r(2, 2)));
  e.yaw = rad2deg(std::atan2(r(1, 0), r(0, 0)));
  return e;
}

Mat4 RigidTransform::to_matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.to_matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  require(a.source == b.target, ErrorCode::kFrameMismatch,
          "compose: frame mismatch ('" + a.source + "' vs '" + b.target + "')");
  RigidTransform out;
  out.rotation = quat_normalize(a.rotation * b.rotation);
  out.translation = a.rotation.rotate(b.translation) + a.translation;
  out.source = b.source;
  out.target = a.target;
  return out;
}

RigidTransform inverse(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.conjugate();
  out.translation = -out.rotation.rotate(t.translation);
  out.source = t.target;
  out.target = t.source;
  return out;
}

PointCloud apply(const RigidTransform& t, const PointCloud& pc) {
  PointCloud out;
  out.frame = t.target;
  out.points.reserve(pc.size());
  const Mat3 r = t.rotation.to_matrix();
  for (const auto& p : pc.points) out.points.push_back(r * p + t.translation);
  return out;
}

std::string format_transform(const RigidTransform& t) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g", t.rotation.w,
                t.rotation.x, t.rotation.y, t.rotation.z, t.translation.x(), t.translation.y(),
                t.translation.z());
  return buf;
}

RigidTransform parse_transform(const std::string& line, const FrameId& source,
                               const FrameId& target) {
  std::istringstream in(line);
  double v[7];
  for (double& x : v) {
    require(static_cast<bool>(in >> x), ErrorCode::kParse,
            "transform: expected 7 numbers in '" + line + "'");
  }
  std::string extra;
  require(!(in >> extra), ErrorCode::kParse, "transform: trailing data in '" + line + "'");
  RigidTransform t;
  t.rotation = Quaternion{v[0], v[1], v[2], v[3]};
  require(is_unit(t.rotation), ErrorCode::kParse, "transform: rotation is not unit-norm");
  if (!is_unit(t.rotation, 1e-12)) t.rotation = quat_normalize(t.rotation);
  t.translation = Vec3(v[4], v[5], v[6]);
  t.source = source;
  t.target = target;
  return t;
}

void Intrinsics::validate() const {
  require(fx > 0 && fy > 0, ErrorCode::kInvalidArgument, "intrinsics: focal lengths must be > 0");
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument, "intrinsics: empty image size");
  require(cx > 0 && cx < width && cy > 0 && cy < height, ErrorCode::kInvalidArgument,
          "intrinsics: principal point outside image");
}

}  // namespace trical

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

#pragma once

#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "trical/common.hpp"

namespace trical {

/// Scalar-first quaternion (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }

  double norm() const;
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  /// Hamilton product.
  Quaternion operator*(const Quaternion& o) const;
  /// Rotates v; assumes unit norm.
  Vec3 rotate(const Vec3& v) const;
  Mat3 to_matrix() const;
};

Quaternion quat_normalize(const Quaternion& q);

/// Angle in degrees between two unit quaternions, collapsing the double cover.
double angular_distance(const Quaternion& a, const Quaternion& b);
/// Same as angular_distance, in radians.
double angular_distance_rad(const Quaternion& a, const Quaternion& b);

bool is_unit(const Quaternion& q, double tol = 1e-6);

/// Intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll). Degrees in.
Quaternion euler_to_quat(double roll_deg, double pitch_deg, double yaw_deg);

struct EulerAngles {
  double roll = 0.0;   // degrees
  double pitch = 0.0;  // degrees
  double yaw = 0.0;    // degrees
  bool gimbal_lock = false;
};

EulerAngles quat_to_euler(const Quaternion& q);

using FrameId = std::string;

struct PointCloud {
  std::vector<Vec3> points;
  FrameId frame;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Maps coordinates expressed in `source` to coordinates expressed in `target`.
struct RigidTransform {
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();
  FrameId source;
  FrameId target;

  static RigidTransform identity(const FrameId& frame) {
    return {Quaternion::identity(), Vec3::Zero(), frame, frame};
  }

  Vec3 operator()(const Vec3& p) const { return rotation.rotate(p) + translation; }
  Mat4 to_matrix() const;
};

/// (a o b)(x) = a(b(x)); requires a.source == b.target.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);
PointCloud apply(const RigidTransform& t, const PointCloud& pc);

/// `qw qx qy qz tx ty tz` with 17 significant digits.
std::string format_transform(const RigidTransform& t);
RigidTransform parse_transform(const std::string& line, const FrameId& source, const FrameId& target);

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

}  // namespace trical

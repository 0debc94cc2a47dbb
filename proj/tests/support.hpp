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

// Random generators and reference implementations shared by the test binaries.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trical/common.hpp"
#include "trical/geometry.hpp"
#include "trical/grid.hpp"
#include "trical/random.hpp"

namespace trical::testing {

inline Rng rng_for(std::uint64_t case_id, std::uint64_t index = 0) {
  return Rng::substream(0x7e57, {stream::kTest, case_id, index});
}

/// Uniform on the unit 3-sphere (normalized Gaussian 4-vector).
inline Quaternion random_quat(Rng& rng) {
  for (;;) {
    Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const double n = q.norm();
    if (n > 1e-3) return {q.w / n, q.x / n, q.y / n, q.z / n};
  }
}

inline Vec3 random_vec(Rng& rng, double scale) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

inline RigidTransform random_transform(Rng& rng, const FrameId& source, const FrameId& target,
                                       double scale = 5.0) {
  return {random_quat(rng), random_vec(rng, scale), source, target};
}

/// Rotation by `deg` degrees about a random axis.
inline Quaternion rotation_by(Rng& rng, double deg) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  const double h = 0.5 * deg2rad(deg);
  return {std::cos(h), std::sin(h) * axis.x(), std::sin(h) * axis.y(), std::sin(h) * axis.z()};
}

/// Points in front of a camera: |x| <= 0.6 z, |y| <= 0.4 z, z in [z0, z1].
inline PointCloud random_frustum_cloud(Rng& rng, std::size_t n, double z0, double z1,
                                       const FrameId& frame = "cam") {
  PointCloud pc;
  pc.frame = frame;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.uniform(z0, z1);
    pc.points.emplace_back(rng.uniform(-0.6, 0.6) * z, rng.uniform(-0.4, 0.4) * z, z);
  }
  return pc;
}

inline Grid random_grid(Rng& rng, int c, int h, int w, double lo = -1.0, double hi = 1.0) {
  Grid g(c, h, w);
  for (double& v : g.data()) v = rng.uniform(lo, hi);
  return g;
}

/// Rounds half away from zero without std::round.
inline double round_away(double v) { return v >= 0 ? std::floor(v + 0.5) : -std::floor(-v + 0.5); }

/// Pixel of a camera-frame point under `k`, by the pinhole formula; -1 when behind the
/// camera or outside the image.
inline long reference_pixel(const Vec3& p, const Intrinsics& k) {
  if (p.z() <= 0) return -1;
  const double u = round_away(k.fx * p.x() / p.z() + k.cx), v = round_away(k.fy * p.y() / p.z() + k.cy);
  if (u < 0 || v < 0 || u >= k.width || v >= k.height) return -1;
  return static_cast<long>(v) * k.width + static_cast<long>(u);
}

/// Winning point index per pixel (-1 for empty). A point wins when no other point on the
/// same pixel is nearer, or equally near with a lower index. Quadratic in the cloud size.
inline std::vector<int> pairwise_winners(const PointCloud& pc, const Intrinsics& k) {
  std::vector<int> out(static_cast<std::size_t>(k.width) * k.height, -1);
  std::vector<long> pix(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) pix[i] = reference_pixel(pc.points[i], k);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (pix[i] < 0) continue;
    bool wins = true;
    for (std::size_t j = 0; j < pc.size() && wins; ++j) {
      if (j == i || pix[j] != pix[i]) continue;
      const double zi = pc.points[i].z(), zj = pc.points[j].z();
      if (zj < zi || (zj == zi && j < i)) wins = false;
    }
    if (wins) out[static_cast<std::size_t>(pix[i])] = static_cast<int>(i);
  }
  return out;
}

// Homogeneous-matrix reference for rotations: built from the axis-angle form with Eigen,
// independent of the library's quaternion code.
inline Mat3 reference_rotation(const Quaternion& q) {
  return Eigen::Quaterniond(q.w, q.x, q.y, q.z).toRotationMatrix();
}

inline Mat4 reference_matrix(const RigidTransform& t) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = reference_rotation(t.rotation);
  m.topRightCorner<3, 1>() = t.translation;
  return m;
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff(); }
inline double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Scratch directory under the system temp directory, emptied on creation.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("trical_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace trical::testing

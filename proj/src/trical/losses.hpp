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

#include <optional>
#include <span>
#include <vector>

#include "trical/geometry.hpp"

namespace trical {

using Vec4 = Eigen::Vector4d;

/// Gradient with respect to a pose parameterized as (t, q = (w, x, y, z)).
struct PoseGrad {
  Vec3 d_t = Vec3::Zero();
  Vec4 d_q = Vec4::Zero();
};

struct LossWeights {
  double lambda_t = 1.0;
  double lambda_r = 1.0;
  double w = 0.5;

  void validate() const;
};

/// Smooth L1 (beta = 1) summed over components.
double smooth_l1(const Vec3& diff);
Vec3 smooth_l1_grad(const Vec3& diff);

/// Batch mean of smooth_l1(pred - target). `grad`, when given, receives d/dpred per sample.
double loss_translation(std::span<const Vec3> pred, std::span<const Vec3> target,
                        std::vector<Vec3>* grad = nullptr);

/// Batch mean angular distance in radians. `grad` receives d/dpred (as a 4-vector) per sample;
/// zero where |<pred, target>| is clamped at 1.
double loss_rotation(std::span<const Quaternion> pred, std::span<const Quaternion> target,
                     std::vector<Vec4>* grad = nullptr);

/// Batch mean of per-cloud mean ||pred(x) - target(x)||.
double loss_pcd(std::span<const RigidTransform> pred, std::span<const RigidTransform> target,
                std::span<const PointCloud> clouds, std::vector<PoseGrad>* grad = nullptr);

/// d(R(q) x)/dq for the quadratic rotation-matrix form, as a 3x4 Jacobian.
Eigen::Matrix<double, 3, 4> rotate_jacobian(const Quaternion& q, const Vec3& x);

struct PairLossBreakdown {
  double l_trans = 0.0;
  double l_rot = 0.0;
  double l_pcd = 0.0;
  double l_pair = 0.0;
};

/// (1 - w) (lambda_t l_trans + lambda_r l_rot) + w l_pcd.
PairLossBreakdown loss_pair(double l_trans, double l_rot, double l_pcd, const LossWeights& weights);

/// Sum of the present pair losses; at least one is required.
double loss_total(const std::optional<PairLossBreakdown>& rgb, const std::optional<PairLossBreakdown>& event);

struct PairLossResult {
  PairLossBreakdown breakdown;
  std::vector<PoseGrad> grads;  // d l_pair / d (t_i, q_i)
};

/// All three terms and their weighted per-sample gradients for one pair.
PairLossResult evaluate_pair_loss(std::span<const RigidTransform> pred, std::span<const RigidTransform> target,
                                  std::span<const PointCloud> clouds, const LossWeights& weights);

}  // namespace trical

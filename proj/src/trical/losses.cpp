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

#include "trical/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace trical {

void LossWeights::validate() const {
  require(lambda_t >= 0 && lambda_r >= 0, ErrorCode::kInvalidArgument, "loss weights: lambdas must be >= 0");
  require(w >= 0 && w <= 1, ErrorCode::kInvalidArgument, "loss weights: w must be in [0, 1]");
}

double smooth_l1(const Vec3& diff) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::abs(diff[i]);
    s += a < 1.0 ? 0.5 * a * a : a - 0.5;
  }
  return s;
}

Vec3 smooth_l1_grad(const Vec3& diff) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) g[i] = std::abs(diff[i]) < 1.0 ? diff[i] : (diff[i] > 0 ? 1.0 : -1.0);
  return g;
}

double loss_translation(std::span<const Vec3> pred, std::span<const Vec3> target, std::vector<Vec3>* grad) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "loss_translation: empty batch");
  require(pred.size() == target.size(), ErrorCode::kInvalidArgument, "loss_translation: batch size mismatch");
  const double inv_b = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  if (grad) grad->assign(pred.size(), Vec3::Zero());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 d = pred[i] - target[i];
    sum += smooth_l1(d);
    if (grad) (*grad)[i] = smooth_l1_grad(d) * inv_b;
  }
  return sum * inv_b;
}

double loss_rotation(std::span<const Quaternion> pred, std::span<const Quaternion> target, std::vector<Vec4>* grad) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "loss_rotation: empty batch");
  require(pred.size() == target.size(), ErrorCode::kInvalidArgument, "loss_rotation: batch size mismatch");
  const double inv_b = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  if (grad) grad->assign(pred.size(), Vec4::Zero());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += angular_distance_rad(pred[i], target[i]);
    if (!grad) continue;
    const double d = pred[i].dot(target[i]);
    const double c = std::abs(d);
    if (c >= 1.0) continue;  // subgradient at the clamp
    // theta = 2 acos(|d|)  =>  dtheta/dpred = -2 sign(d) / sqrt(1 - d^2) * target
    const double k = -2.0 * (d >= 0 ? 1.0 : -1.0) / std::sqrt(1.0 - c * c) * inv_b;
    (*grad)[i] = k * Vec4(target[i].w, target[i].x, target[i].y, target[i].z);
  }
  return sum * inv_b;
}

namespace {

// Partial derivatives of the quadratic rotation-matrix form with respect to (w, x, y, z).
std::array<Mat3, 4> rotation_partials(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  std::array<Mat3, 4> d;
  d[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  d[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  d[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  d[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (Mat3& m : d) m *= 2.0;
  return d;
}

}  // namespace

Eigen::Matrix<double, 3, 4> rotate_jacobian(const Quaternion& q, const Vec3& p) {
  const auto d = rotation_partials(q);
  Eigen::Matrix<double, 3, 4> j;
  for (int k = 0; k < 4; ++k) j.col(k) = d[k] * p;
  return j;
}

double loss_pcd(std::span<const RigidTransform> pred, std::span<const RigidTransform> target,
                std::span<const PointCloud> clouds, std::vector<PoseGrad>* grad) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "loss_pcd: empty batch");
  require(pred.size() == target.size() && pred.size() == clouds.size(), ErrorCode::kInvalidArgument,
          "loss_pcd: batch size mismatch");
  const double inv_b = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  if (grad) grad->assign(pred.size(), PoseGrad{});
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const PointCloud& pc = clouds[i];
    require(!pc.empty(), ErrorCode::kInvalidArgument, "loss_pcd: empty cloud");
    const Mat3 rp = pred[i].rotation.to_matrix();
    const Mat3 rt = target[i].rotation.to_matrix();
    const double inv_n = 1.0 / static_cast<double>(pc.size());
    double cloud_sum = 0.0;
    Vec3 g_t = Vec3::Zero();
    Mat3 g_outer = Mat3::Zero();  // sum of unit residual * x^T
    for (const Vec3& x : pc.points) {
      const Vec3 e = (rp * x + pred[i].translation) - (rt * x + target[i].translation);
      const double n = e.norm();
      cloud_sum += n;
      if (grad && n > 0) {
        const Vec3 u = e / n;
        g_t += u;
        g_outer += u * x.transpose();
      }
    }
    sum += cloud_sum * inv_n;
    if (grad) {
      const double s = inv_n * inv_b;
      PoseGrad& g = (*grad)[i];
      g.d_t = g_t * s;
      // d/dq sum_x u^T R(q) x = sum over matrix entries of g_outer .* dR/dq.
      const auto d = rotation_partials(pred[i].rotation);
      for (int k = 0; k < 4; ++k) g.d_q[k] = s * g_outer.cwiseProduct(d[k]).sum();
    }
  }
  return sum * inv_b;
}

PairLossBreakdown loss_pair(double l_trans, double l_rot, double l_pcd, const LossWeights& weights) {
  weights.validate();
  PairLossBreakdown b{l_trans, l_rot, l_pcd, 0.0};
  b.l_pair = (1.0 - weights.w) * (weights.lambda_t * l_trans + weights.lambda_r * l_rot) + weights.w * l_pcd;
  return b;
}

double loss_total(const std::optional<PairLossBreakdown>& rgb, const std::optional<PairLossBreakdown>& event) {
  require(rgb || event, ErrorCode::kInvalidArgument, "loss_total: no pair losses present");
  return (rgb ? rgb->l_pair : 0.0) + (event ? event->l_pair : 0.0);
}

PairLossResult evaluate_pair_loss(std::span<const RigidTransform> pred, std::span<const RigidTransform> target,
                                  std::span<const PointCloud> clouds, const LossWeights& weights) {
  weights.validate();
  std::vector<Vec3> pt, tt;
  std::vector<Quaternion> pq, tq;
  for (const auto& t : pred) {
    pt.push_back(t.translation);
    pq.push_back(t.rotation);
  }
  for (const auto& t : target) {
    tt.push_back(t.translation);
    tq.push_back(t.rotation);
  }
  std::vector<Vec3> g_trans;
  std::vector<Vec4> g_rot;
  std::vector<PoseGrad> g_pcd;
  const double lt = loss_translation(pt, tt, &g_trans);
  const double lr = loss_rotation(pq, tq, &g_rot);
  const double lp = loss_pcd(pred, target, clouds, &g_pcd);

  PairLossResult r;
  r.breakdown = loss_pair(lt, lr, lp, weights);
  r.grads.resize(pred.size());
  const double a = 1.0 - weights.w;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    r.grads[i].d_t = a * weights.lambda_t * g_trans[i] + weights.w * g_pcd[i].d_t;
    r.grads[i].d_q = a * weights.lambda_r * g_rot[i] + weights.w * g_pcd[i].d_q;
  }
  return r;
}

}  // namespace trical

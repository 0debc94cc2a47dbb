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

#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "trical/losses.hpp"

using namespace trical;
using namespace trical::testing;

namespace {

Quaternion normalized(const Vec4& raw) {
  const double n = raw.norm();
  return {raw[0] / n, raw[1] / n, raw[2] / n, raw[3] / n};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST_CASE("translation loss examples") {
  const std::vector<Vec3> zero{Vec3::Zero()};
  CHECK(loss_translation(zero, zero) == 0.0);
  CHECK(loss_translation(std::vector<Vec3>{Vec3(1, 0, 0)}, zero) == 0.5);
  CHECK(loss_translation(std::vector<Vec3>{Vec3(2, 0, 0)}, zero) == 1.5);
  CHECK_THROWS_AS(loss_translation(std::vector<Vec3>{}, std::vector<Vec3>{}), Error);
  CHECK_THROWS_AS(loss_translation(zero, std::vector<Vec3>{Vec3::Zero(), Vec3::Zero()}), Error);
}

TEST_CASE("smooth L1 is C1 at the transition") {
  const double h = 1e-7;
  for (double x : {1.0, -1.0}) {
    const double left = (smooth_l1(Vec3(x, 0, 0)) - smooth_l1(Vec3(x - h, 0, 0))) / h;
    const double right = (smooth_l1(Vec3(x + h, 0, 0)) - smooth_l1(Vec3(x, 0, 0))) / h;
    CHECK(std::abs(std::abs(left) - 1.0) < 1e-6);
    CHECK(std::abs(std::abs(right) - 1.0) < 1e-6);
    CHECK(std::abs(left - right) < 1e-6);
  }
}

TEST_CASE("rotation loss examples") {
  const double s = std::sqrt(0.5);
  const Quaternion id = Quaternion::identity(), quarter{s, 0, 0, s};
  const std::vector<Quaternion> one{id};
  CHECK(loss_rotation(one, one) == 0.0);
  CHECK(loss_rotation(std::vector<Quaternion>{quarter}, one) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(loss_rotation(std::vector<Quaternion>{id, quarter}, std::vector<Quaternion>{id, id}) ==
        doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK_THROWS_AS(loss_rotation(std::vector<Quaternion>{{2, 0, 0, 0}}, one), Error);
}

TEST_CASE("point cloud loss examples") {
  Rng rng = rng_for(80);
  const RigidTransform t = random_transform(rng, "a", "a");
  RigidTransform shifted = t;
  shifted.translation += Vec3(0, 0, 0.1);
  const std::vector<PointCloud> clouds{random_frustum_cloud(rng, 50, 1, 20, "a")};
  CHECK(loss_pcd(std::vector<RigidTransform>{t}, std::vector<RigidTransform>{t}, clouds) == 0.0);
  CHECK(loss_pcd(std::vector<RigidTransform>{shifted}, std::vector<RigidTransform>{t}, clouds) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(loss_pcd(std::vector<RigidTransform>{t}, std::vector<RigidTransform>{t},
                           std::vector<PointCloud>{PointCloud{}}),
                  Error);
}

TEST_CASE("point cloud loss matches a direct per-point sum") {
  Rng rng = rng_for(81);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RigidTransform> pred, truth;
    std::vector<PointCloud> clouds;
    for (int b = 0; b < 3; ++b) {
      pred.push_back(random_transform(rng, "a", "a", 2.0));
      truth.push_back(random_transform(rng, "a", "a", 2.0));
      clouds.push_back(random_frustum_cloud(rng, 200, 1, 30, "a"));
    }
    double total = 0.0;
    for (int b = 0; b < 3; ++b) {
      const Mat4 mp = reference_matrix(pred[b]), mt = reference_matrix(truth[b]);
      double s = 0.0;
      for (const auto& x : clouds[b].points) s += ((mp - mt) * x.homogeneous()).norm();
      total += s / 200.0;
    }
    CHECK(std::abs(loss_pcd(pred, truth, clouds) - total / 3.0) < 1e-12);
  }
}

TEST_CASE("point cloud loss of a pure rotation obeys the chord bound") {
  Rng rng = rng_for(82);
  for (int trial = 0; trial < 200; ++trial) {
    const double deg = rng.uniform(0.01, 30.0);
    const RigidTransform rot{rotation_by(rng, deg), Vec3::Zero(), "a", "a"};
    const PointCloud pc = random_frustum_cloud(rng, 100, 1, 40, "a");
    double max_norm = 0.0;
    for (const auto& x : pc.points) max_norm = std::max(max_norm, x.norm());
    const double l = loss_pcd(std::vector<RigidTransform>{rot}, std::vector<RigidTransform>{RigidTransform::identity("a")},
                              std::vector<PointCloud>{pc});
    CHECK(l <= deg2rad(deg) * max_norm + 1e-12);
  }
}

TEST_CASE("losses vanish only at the target") {
  Rng rng = rng_for(83);
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform t = random_transform(rng, "a", "a");
    RigidTransform flipped = t;
    flipped.rotation = -t.rotation;
    const std::vector<RigidTransform> tv{t}, fv{flipped};
    const std::vector<PointCloud> clouds{random_frustum_cloud(rng, 20, 1, 10, "a")};
    CHECK(loss_rotation(std::vector<Quaternion>{flipped.rotation}, std::vector<Quaternion>{t.rotation}) < 1e-6);
    CHECK(loss_pcd(fv, tv, clouds) < 1e-12);
    const RigidTransform other = random_transform(rng, "a", "a");
    CHECK(loss_translation(std::vector<Vec3>{other.translation}, std::vector<Vec3>{t.translation}) > 0.0);
    CHECK(loss_rotation(std::vector<Quaternion>{other.rotation}, std::vector<Quaternion>{t.rotation}) > 0.0);
    CHECK(loss_pcd(std::vector<RigidTransform>{other}, tv, clouds) > 0.0);
  }
}

TEST_CASE("pair loss and total examples") {
  const LossWeights w;
  CHECK(loss_pair(0.2, 0.1, 0.4, w).l_pair == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(loss_pair(0.2, 0.1, 0.4, {1, 1, 1}).l_pair == 0.4);
  CHECK(loss_pair(0.2, 0.1, 0.4, {1, 0, 0}).l_pair == 0.2);
  CHECK_THROWS_AS(loss_pair(0.2, 0.1, 0.4, {1, 1, 1.5}), Error);
  CHECK_THROWS_AS(loss_pair(0.2, 0.1, 0.4, {-1, 1, 0.5}), Error);

  const PairLossBreakdown a{0, 0, 0, 0.35}, b{0, 0, 0, 0.15};
  CHECK(loss_total(a, b) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(loss_total(b, a) == loss_total(a, b));
  CHECK(loss_total(a, std::nullopt) == 0.35);
  CHECK(loss_total(std::nullopt, b) == 0.15);
  CHECK_THROWS_AS(loss_total(std::nullopt, std::nullopt), Error);
}

TEST_CASE("pair loss combination holds for random components") {
  Rng rng = rng_for(84);
  for (int i = 0; i < 1000; ++i) {
    const LossWeights w{rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform()};
    const double lt = rng.uniform(), lr = rng.uniform(), lp = rng.uniform();
    const PairLossBreakdown b = loss_pair(lt, lr, lp, w);
    CHECK(b.l_pair == (1 - w.w) * (w.lambda_t * lt + w.lambda_r * lr) + w.w * lp);
  }
}

TEST_CASE("loss gradients match central differences in t and pre-normalization q") {
  Rng rng = rng_for(85);
  const LossWeights weights{1.0, 1.0, 0.5};
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int batch = 1 + static_cast<int>(rng.below(4));
    std::vector<Vec4> raw;
    std::vector<Vec3> tr;
    std::vector<RigidTransform> truth;
    std::vector<PointCloud> clouds;
    for (int b = 0; b < batch; ++b) {
      const Quaternion q = random_quat(rng);
      raw.push_back(Vec4(q.w, q.x, q.y, q.z) * rng.uniform(0.5, 2.0));
      tr.push_back(random_vec(rng, 1.5));
      truth.push_back(random_transform(rng, "a", "a", 1.0));
      clouds.push_back(random_frustum_cloud(rng, 30, 1, 10, "a"));
    }
    auto loss_at = [&](const std::vector<Vec4>& r, const std::vector<Vec3>& t) {
      std::vector<RigidTransform> pred;
      for (int b = 0; b < batch; ++b) pred.push_back({normalized(r[b]), t[b], "a", "a"});
      return evaluate_pair_loss(pred, truth, clouds, weights).breakdown.l_pair;
    };
    std::vector<RigidTransform> pred;
    for (int b = 0; b < batch; ++b) pred.push_back({normalized(raw[b]), tr[b], "a", "a"});
    const PairLossResult res = evaluate_pair_loss(pred, truth, clouds, weights);
    for (int b = 0; b < batch; ++b) {
      const Vec4 qh = raw[b] / raw[b].norm();
      const Vec4 d_raw = (res.grads[b].d_q - qh * qh.dot(res.grads[b].d_q)) / raw[b].norm();
      for (int k = 0; k < 4; ++k) {
        auto rp = raw, rm = raw;
        rp[b][k] += h;
        rm[b][k] -= h;
        worst = std::max(worst, rel_err(d_raw[k], (loss_at(rp, tr) - loss_at(rm, tr)) / (2 * h)));
      }
      for (int k = 0; k < 3; ++k) {
        auto tp = tr, tm = tr;
        tp[b][k] += h;
        tm[b][k] -= h;
        worst = std::max(worst, rel_err(res.grads[b].d_t[k], (loss_at(raw, tp) - loss_at(raw, tm)) / (2 * h)));
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("rotate_jacobian matches finite differences") {
  Rng rng = rng_for(86);
  for (int trial = 0; trial < 50; ++trial) {
    const Quaternion q = random_quat(rng);
    const Vec3 x = random_vec(rng, 5.0);
    const auto j = rotate_jacobian(q, x);
    const Vec4 v(q.w, q.x, q.y, q.z);
    for (int k = 0; k < 4; ++k) {
      Vec4 p = v, m = v;
      p[k] += 1e-6;
      m[k] -= 1e-6;
      // R(q) x = x + 2 w (u x x) + 2 u x (u x x), evaluated off the unit sphere.
      auto rot = [&](const Vec4& a) {
        const Vec3 u(a[1], a[2], a[3]);
        return Vec3(x + 2 * a[0] * u.cross(x) + 2 * u.cross(u.cross(x)));
      };
      const Vec3 fd = (rot(p) - rot(m)) / 2e-6;
      CHECK((j.col(k) - fd).norm() < 1e-6 * std::max(1.0, fd.norm()));
    }
  }
}

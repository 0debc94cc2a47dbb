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

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "support.hpp"
#include "trical/dataset.hpp"
#include "trical/eval.hpp"

using namespace trical;
using namespace trical::testing;

namespace {

PairTruth both_truths() {
  const RigidTransform rgb = default_lidar_to_rgb();
  return {rgb, compose(default_rgb_to_event(), rgb)};
}

// Returns the exact remaining correction.
RigidTransform oracle_predict(const PairTruth& truth, Pair pair, const RigidTransform& current) {
  return compose(*truth[static_cast<int>(pair)], inverse(current));
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("refine_step examples") {
  Rng rng = rng_for(110);
  const RigidTransform prev_t = random_transform(rng, "rgb", "rgb");
  const CalibrationEstimate prev{Pair::kRgb, 1, prev_t};
  const CalibrationEstimate same = refine_step(prev, RigidTransform::identity("rgb"), 3);
  CHECK(same.stage == 2);
  CHECK(max_abs_diff(reference_matrix(same.estimate), reference_matrix(prev_t)) < 1e-15);
  const CalibrationEstimate undone = refine_step(prev, inverse(prev_t), 3);
  CHECK(max_abs_diff(reference_matrix(undone.estimate), Mat4::Identity()) < 1e-12);
  CHECK_THROWS_AS(refine_step({Pair::kRgb, 3, prev_t}, prev_t, 3), Error);
  CHECK_THROWS_AS(refine_step(prev, RigidTransform::identity("event"), 3), Error);
  const CalibrationEstimate init = initial_estimate(Pair::kEvent, "event");
  CHECK(init.stage == 0);
  CHECK(init.estimate.rotation.w == 1.0);
  CHECK(init.estimate.translation == Vec3::Zero());
}

TEST_CASE("refinement telescopes to the unrolled matrix product") {
  Rng rng = rng_for(111);
  for (int trial = 0; trial < 200; ++trial) {
    CalibrationEstimate est = initial_estimate(Pair::kRgb, "rgb");
    Mat4 chain = Mat4::Identity();
    for (int k = 0; k < 5; ++k) {
      const RigidTransform d = random_transform(rng, "rgb", "rgb", 2.0);
      est = refine_step(est, d, 5);
      chain = reference_matrix(d) * chain;
    }
    CHECK(est.stage == 5);
    CHECK(max_abs_diff(reference_matrix(est.estimate), chain) < 1e-9);
  }
}

TEST_CASE("metric examples") {
  const std::vector<Vec3> zero{Vec3::Zero()};
  CHECK(metric_et(std::vector<Vec3>{Vec3(0.03, 0.04, 0)}, zero) == 5.0);
  CHECK(metric_et(zero, zero) == 0.0);
  CHECK_THROWS_AS(metric_et(std::vector<Vec3>{}, std::vector<Vec3>{}), Error);
  CHECK_THROWS_AS(metric_et(zero, std::vector<Vec3>{}), Error);

  const Quaternion id = Quaternion::identity();
  const std::vector<Quaternion> ids{id, id};
  CHECK(metric_er(ids, ids) == 0.0);
  CHECK(metric_er(std::vector<Quaternion>{id, euler_to_quat(0, 0, 2)}, ids) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(metric_er(std::vector<Quaternion>{{2, 0, 0, 0}}, std::vector<Quaternion>{id}), Error);
  CHECK_THROWS_AS(metric_er(std::vector<Quaternion>{}, std::vector<Quaternion>{}), Error);
}

TEST_CASE("metrics match loop oracles and vanish on identical inputs") {
  Rng rng = rng_for(112);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<Vec3> tp, tt;
    std::vector<Quaternion> qp, qt, qflip;
    for (std::size_t i = 0; i < n; ++i) {
      tp.push_back(random_vec(rng, 2.0));
      tt.push_back(random_vec(rng, 2.0));
      qp.push_back(random_quat(rng));
      qt.push_back(random_quat(rng));
      qflip.push_back(rng.uniform() < 0.5 ? -qp.back() : qp.back());
    }
    double et = 0.0, er = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      et += 100.0 * std::sqrt((tp[i] - tt[i]).squaredNorm()) / n;
      const Eigen::Quaterniond a(qp[i].w, qp[i].x, qp[i].y, qp[i].z), b(qt[i].w, qt[i].x, qt[i].y, qt[i].z);
      er += rad2deg(a.angularDistance(b)) / n;
    }
    CHECK(std::abs(metric_et(tp, tt) - et) < 1e-12);
    CHECK(std::abs(metric_er(qp, qt) - er) < 1e-10);
    CHECK(metric_et(tp, tp) == 0.0);
    CHECK(metric_er(qp, qp) == 0.0);
    CHECK(std::abs(metric_er(qflip, qt) - metric_er(qp, qt)) < 1e-12);
  }
}

TEST_CASE("per-axis error examples") {
  Rng rng = rng_for(113);
  std::vector<RigidTransform> truth, shifted;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(random_transform(rng, "lidar", "rgb"));
    shifted.push_back(truth.back());
    shifted.back().translation += Vec3(0, 0, 0.01);
  }
  const PerAxisErrors same = per_axis_errors(truth, truth);
  CHECK(same.e_x == 0.0);
  CHECK(same.e_z == 0.0);
  CHECK(std::abs(same.e_roll) < 1e-6);
  const PerAxisErrors z = per_axis_errors(shifted, truth);
  CHECK(z.e_z == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(z.e_x == 0.0);
  CHECK(z.e_y == 0.0);

  std::vector<RigidTransform> rolled = truth;
  for (auto& t : rolled) t.rotation = t.rotation * euler_to_quat(3, 0, 0);
  const PerAxisErrors r = per_axis_errors(rolled, truth);
  CHECK(r.e_roll == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.e_pitch < 1e-9);
  CHECK(r.e_yaw < 1e-9);
  CHECK_THROWS_AS(per_axis_errors(std::vector<RigidTransform>{}, std::vector<RigidTransform>{}), Error);
}

TEST_CASE("per-axis errors match a component-wise oracle") {
  Rng rng = rng_for(114);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RigidTransform> pred, truth;
    for (int i = 0; i < 8; ++i) {
      truth.push_back(random_transform(rng, "lidar", "rgb"));
      RigidTransform p = truth.back();
      p.rotation = p.rotation * rotation_by(rng, rng.uniform(0, 20));
      p.translation += random_vec(rng, 0.5);
      pred.push_back(p);
    }
    double ex = 0, ey = 0, ez = 0, er = 0, ep = 0, ey2 = 0;
    for (int i = 0; i < 8; ++i) {
      const Vec3 d = pred[i].translation - truth[i].translation;
      ex += 100 * std::abs(d.x()) / 8;
      ey += 100 * std::abs(d.y()) / 8;
      ez += 100 * std::abs(d.z()) / 8;
      // Z-Y-X Euler angles of the relative rotation matrix.
      const Mat3 m = reference_rotation(pred[i].rotation).transpose() * reference_rotation(truth[i].rotation);
      er += std::abs(rad2deg(std::atan2(m(2, 1), m(2, 2)))) / 8;
      ep += std::abs(rad2deg(std::asin(std::clamp(-m(2, 0), -1.0, 1.0)))) / 8;
      ey2 += std::abs(rad2deg(std::atan2(m(1, 0), m(0, 0)))) / 8;
    }
    const PerAxisErrors e = per_axis_errors(pred, truth);
    CHECK(std::abs(e.e_x - ex) < 1e-10);
    CHECK(std::abs(e.e_y - ey) < 1e-10);
    CHECK(std::abs(e.e_z - ez) < 1e-10);
    CHECK(std::abs(e.e_roll - er) < 1e-10);
    CHECK(std::abs(e.e_pitch - ep) < 1e-10);
    CHECK(std::abs(e.e_yaw - ey2) < 1e-10);
  }
}

TEST_CASE("per-sample translation norm bounds each component") {
  Rng rng = rng_for(115);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 d = random_vec(rng, 1.0);
    const std::vector<Vec3> p{d}, z{Vec3::Zero()};
    std::vector<RigidTransform> tp{{Quaternion::identity(), d, "a", "b"}}, tz{RigidTransform::identity("b")};
    tz[0].source = "a";
    const PerAxisErrors e = per_axis_errors(tp, tz);
    const double et = metric_et(p, z);
    CHECK(et + 1e-12 >= std::max({e.e_x, e.e_y, e.e_z}));
  }
}

TEST_CASE("zero perturbation starts at zero error") {
  const PairTruth truth = both_truths();
  const StageSchedule sched{{{0, 0}}};
  const auto traces = run_pipeline(
      truth, sched, 1, [](Pair, int, const RigidTransform& c) { return RigidTransform::identity(c.target); }, 3, 0);
  REQUIRE(traces.size() == 2);
  const StageReport rep = build_report(std::vector<std::vector<PairTrace>>{traces});
  CHECK(rep.row(Pair::kRgb, 0).e_t < 1e-12);
  CHECK(rep.row(Pair::kEvent, 0).e_r < 1e-6);
}

TEST_CASE("oracle stage models cancel the miscalibration") {
  const PairTruth truth = both_truths();
  for (const char* name : {"two_stage", "five_stage"}) {
    const StageSchedule sched = builtin_schedule(name);
    std::vector<std::vector<PairTrace>> all;
    for (std::uint64_t f = 0; f < 50; ++f)
      all.push_back(run_pipeline(
          truth, sched, static_cast<int>(sched.size()),
          [&](Pair p, int, const RigidTransform& c) { return oracle_predict(truth, p, c); }, 21, f));
    const StageReport rep = build_report(all);
    CHECK(rep.rows.size() == 2 * (sched.size() + 1));
    CHECK(count_lines(rep.to_csv()) == 1 + 2 * (sched.size() + 1));
    for (Pair p : {Pair::kRgb, Pair::kEvent}) {
      CHECK(rep.row(p, 0).e_t > 1.0);
      CHECK(rep.row(p, 0).samples == 50);
      for (int k = 1; k <= static_cast<int>(sched.size()); ++k) {
        CHECK(rep.row(p, k).e_t < 1e-9);
        CHECK(rep.row(p, k).e_r < 1e-9);
      }
    }
  }
}

TEST_CASE("missing stage model is an error") {
  const PairTruth truth = both_truths();
  try {
    run_pipeline(truth, builtin_schedule("two_stage"), 1,
                 [](Pair, int, const RigidTransform& c) { return RigidTransform::identity(c.target); }, 0, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingCheckpoint);
    CHECK(std::string(e.what()) == "missing model for stage 2");
  }
}

TEST_CASE("disabling one pair leaves the other report unchanged") {
  const PairTruth both = both_truths();
  PairTruth rgb_only = both, event_only = both;
  rgb_only[1].reset();
  event_only[0].reset();
  const StageSchedule sched = builtin_schedule("two_stage");
  // A deterministic imperfect model: half of the remaining correction.
  auto half = [&](Pair p, int, const RigidTransform& c) {
    const RigidTransform full = oracle_predict(both, p, c);
    const Quaternion q = full.rotation.w < 0 ? -full.rotation : full.rotation;
    const double ang = 2 * std::acos(std::min(1.0, q.w)), s = std::sin(ang / 2);
    Quaternion h = Quaternion::identity();
    if (s > 1e-12) {
      const double hs = std::sin(ang / 4) / s;
      h = {std::cos(ang / 4), q.x * hs, q.y * hs, q.z * hs};
    }
    return RigidTransform{h, 0.5 * full.translation, c.target, c.target};
  };
  std::vector<std::vector<PairTrace>> a, b, c;
  for (std::uint64_t f = 0; f < 10; ++f) {
    a.push_back(run_pipeline(both, sched, 2, half, 4, f));
    b.push_back(run_pipeline(rgb_only, sched, 2, half, 4, f));
    c.push_back(run_pipeline(event_only, sched, 2, half, 4, f));
  }
  const StageReport ra = build_report(a), rb = build_report(b), rc = build_report(c);
  CHECK(rb.rows.size() == 3);
  CHECK(rc.rows.size() == 3);
  for (int k = 0; k <= 2; ++k) {
    CHECK(ra.row(Pair::kRgb, k).e_t == rb.row(Pair::kRgb, k).e_t);
    CHECK(ra.row(Pair::kRgb, k).e_r == rb.row(Pair::kRgb, k).e_r);
    CHECK(ra.row(Pair::kEvent, k).e_t == rc.row(Pair::kEvent, k).e_t);
    CHECK(ra.row(Pair::kEvent, k).e_r == rc.row(Pair::kEvent, k).e_r);
  }
  CHECK(ra.row(Pair::kRgb, 2).e_t < ra.row(Pair::kRgb, 1).e_t);
  CHECK_THROWS_AS(rb.row(Pair::kEvent, 0), Error);
}

TEST_CASE("report formatting") {
  StageReport rep;
  StageRow r;
  r.pair = Pair::kEvent;
  r.stage = 1;
  r.e_t = 1.0 / 3.0;
  r.e_r = 2.0;
  r.samples = 7;
  rep.rows.push_back(r);
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("pair,stage,e_X,e_Y,e_Z,e_t,e_R,e_P,e_Yaw,e_r,n_samples\n", 0) == 0);
  CHECK(csv.find("lidar_event,1,0,0,0,0.33333333333333331,0,0,0,2,7\n") != std::string::npos);
  CHECK(rep.to_table().find("  0.33 |") != std::string::npos);
}

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

#include "trical/eval.hpp"

#include <cmath>
#include <cstdio>

namespace trical {

CalibrationEstimate initial_estimate(Pair pair, const FrameId& camera) {
  return {pair, 0, RigidTransform::identity(camera)};
}

CalibrationEstimate refine_step(const CalibrationEstimate& prev, const RigidTransform& delta, int stage_count) {
  require(prev.stage >= 0 && prev.stage < stage_count, ErrorCode::kInvalidArgument,
          "refine_step: stage " + std::to_string(prev.stage) + " is already final");
  return {prev.pair, prev.stage + 1, compose(delta, prev.estimate)};
}

double metric_et(std::span<const Vec3> pred, std::span<const Vec3> truth) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "metric_et: empty set");
  require(pred.size() == truth.size(), ErrorCode::kInvalidArgument, "metric_et: count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]).norm();
  return 100.0 * s / static_cast<double>(pred.size());
}

double metric_er(std::span<const Quaternion> pred, std::span<const Quaternion> truth) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "metric_er: empty set");
  require(pred.size() == truth.size(), ErrorCode::kInvalidArgument, "metric_er: count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += angular_distance(pred[i], truth[i]);
  return s / static_cast<double>(pred.size());
}

PerAxisErrors per_axis_errors(std::span<const RigidTransform> pred, std::span<const RigidTransform> truth) {
  require(!pred.empty(), ErrorCode::kInvalidArgument, "per_axis_errors: empty set");
  require(pred.size() == truth.size(), ErrorCode::kInvalidArgument, "per_axis_errors: count mismatch");
  PerAxisErrors e;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require(is_unit(pred[i].rotation) && is_unit(truth[i].rotation), ErrorCode::kInvalidArgument,
            "per_axis_errors: non-unit quaternion");
    const Vec3 d = pred[i].translation - truth[i].translation;
    e.e_x += std::abs(d.x());
    e.e_y += std::abs(d.y());
    e.e_z += std::abs(d.z());
    const EulerAngles a = quat_to_euler(pred[i].rotation.conjugate() * truth[i].rotation);
    e.e_roll += std::abs(a.roll);
    e.e_pitch += std::abs(a.pitch);
    e.e_yaw += std::abs(a.yaw);
  }
  const double n = static_cast<double>(pred.size());
  e.e_x *= 100.0 / n;
  e.e_y *= 100.0 / n;
  e.e_z *= 100.0 / n;
  e.e_roll /= n;
  e.e_pitch /= n;
  e.e_yaw /= n;
  return e;
}

const StageRow& StageReport::row(Pair pair, int stage) const {
  for (const auto& r : rows)
    if (r.pair == pair && r.stage == stage) return r;
  throw Error(ErrorCode::kInvalidArgument,
              std::string("stage report: no row for ") + pair_name(pair) + " stage " + std::to_string(stage));
}

std::string StageReport::to_csv() const {
  std::string out = "pair,stage,e_X,e_Y,e_Z,e_t,e_R,e_P,e_Yaw,e_r,n_samples\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", pair_name(r.pair),
                  r.stage, r.axes.e_x, r.axes.e_y, r.axes.e_z, r.e_t, r.axes.e_roll, r.axes.e_pitch, r.axes.e_yaw,
                  r.e_r, r.samples);
    out += buf;
  }
  return out;
}

std::string StageReport::to_table() const {
  std::string out = "pair         stage    e_X    e_Y    e_Z    e_t |    e_R    e_P  e_Yaw    e_r      N\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %5d %6.2f %6.2f %6.2f %6.2f | %6.2f %6.2f %6.2f %6.2f %6zu\n",
                  pair_name(r.pair), r.stage, r.axes.e_x, r.axes.e_y, r.axes.e_z, r.e_t, r.axes.e_roll,
                  r.axes.e_pitch, r.axes.e_yaw, r.e_r, r.samples);
    out += buf;
  }
  return out;
}

RigidTransform PairTrace::extrinsic(int stage) const {
  return compose(estimates.at(static_cast<std::size_t>(stage)).estimate, initial);
}

std::vector<PairTrace> run_pipeline(const PairTruth& truth, const StageSchedule& schedule, int stage_models,
                                    const StagePredictor& predict, std::uint64_t seed, std::uint64_t frame) {
  schedule.validate();
  const int stages = static_cast<int>(schedule.size());
  if (stage_models < stages)
    throw Error(ErrorCode::kMissingCheckpoint, "missing model for stage " + std::to_string(stage_models + 1));
  require(truth[0] || truth[1], ErrorCode::kInvalidArgument, "run_pipeline: no active pair");
  const RigidTransform& any = truth[0] ? *truth[0] : *truth[1];
  const DualPerturbation dp = dual_perturb(truth[0].value_or(any), truth[1].value_or(any), schedule.stages[0], seed,
                                           {stream::kEval, frame});
  std::vector<PairTrace> traces;
  for (int p = 0; p < kPairCount; ++p) {
    if (!truth[p]) continue;
    const Pair pair = static_cast<Pair>(p);
    PairTrace tr;
    tr.pair = pair;
    tr.truth = *truth[p];
    tr.initial = pair == Pair::kRgb ? dp.rgb_init : dp.event_init;
    tr.estimates.push_back(initial_estimate(pair, tr.truth.target));
    for (int k = 1; k <= stages; ++k) {
      const RigidTransform delta = predict(pair, k, tr.extrinsic(k - 1));
      tr.estimates.push_back(refine_step(tr.estimates.back(), delta, stages));
    }
    traces.push_back(std::move(tr));
  }
  return traces;
}

StageReport build_report(std::span<const std::vector<PairTrace>> traces) {
  require(!traces.empty(), ErrorCode::kInvalidArgument, "build_report: no traces");
  StageReport report;
  for (int p = 0; p < kPairCount; ++p) {
    const Pair pair = static_cast<Pair>(p);
    std::vector<const PairTrace*> mine;
    for (const auto& frame : traces)
      for (const auto& tr : frame)
        if (tr.pair == pair) mine.push_back(&tr);
    if (mine.empty()) continue;
    const int stages = static_cast<int>(mine.front()->estimates.size());
    for (int k = 0; k < stages; ++k) {
      std::vector<RigidTransform> pred, truth;
      std::vector<Vec3> pt, tt;
      std::vector<Quaternion> pq, tq;
      for (const PairTrace* tr : mine) {
        pred.push_back(tr->extrinsic(k));
        truth.push_back(tr->truth);
        pt.push_back(pred.back().translation);
        tt.push_back(tr->truth.translation);
        pq.push_back(pred.back().rotation);
        tq.push_back(tr->truth.rotation);
      }
      StageRow row;
      row.pair = pair;
      row.stage = k;
      row.axes = per_axis_errors(pred, truth);
      row.e_t = metric_et(pt, tt);
      row.e_r = metric_er(pq, tq);
      row.samples = mine.size();
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace trical

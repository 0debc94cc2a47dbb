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

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trical/geometry.hpp"
#include "trical/perturb.hpp"

namespace trical {

/// Accumulated correction of one pair after `stage` refinement steps. The correction acts
/// on the camera frame; stage 0 is the identity.
struct CalibrationEstimate {
  Pair pair = Pair::kRgb;
  int stage = 0;
  RigidTransform estimate;
};

CalibrationEstimate initial_estimate(Pair pair, const FrameId& camera);

/// compose(delta, prev.estimate), stage + 1. `stage_count` bounds the stage index.
CalibrationEstimate refine_step(const CalibrationEstimate& prev, const RigidTransform& delta, int stage_count);

/// Mean translation distance in centimeters (inputs in meters).
double metric_et(std::span<const Vec3> pred, std::span<const Vec3> truth);
/// Mean angular distance in degrees.
double metric_er(std::span<const Quaternion> pred, std::span<const Quaternion> truth);

struct PerAxisErrors {
  double e_x = 0, e_y = 0, e_z = 0;           // cm
  double e_roll = 0, e_pitch = 0, e_yaw = 0;  // degrees
};

/// Mean absolute translation components, and mean absolute Euler components of the
/// relative rotation pred^-1 * truth.
PerAxisErrors per_axis_errors(std::span<const RigidTransform> pred, std::span<const RigidTransform> truth);

struct StageRow {
  Pair pair = Pair::kRgb;
  int stage = 0;
  PerAxisErrors axes;
  double e_t = 0.0;
  double e_r = 0.0;
  std::size_t samples = 0;
};

struct StageReport {
  std::vector<StageRow> rows;

  const StageRow& row(Pair pair, int stage) const;
  /// `pair,stage,e_X,e_Y,e_Z,e_t,e_R,e_P,e_Yaw,e_r,n_samples`, full precision.
  std::string to_csv() const;
  /// Console table, two decimals.
  std::string to_table() const;
};

/// Extrinsic trajectory of one pair through the refinement stages.
struct PairTrace {
  Pair pair = Pair::kRgb;
  RigidTransform truth;
  RigidTransform initial;
  std::vector<CalibrationEstimate> estimates;  // stages 0..S

  /// estimates[k] o initial.
  RigidTransform extrinsic(int stage) const;
};

/// Predicts the stage-k correction from the current extrinsic estimate of a pair.
using StagePredictor = std::function<RigidTransform(Pair pair, int stage, const RigidTransform& current)>;

/// Ground-truth extrinsics per pair; inactive pairs are nullopt.
using PairTruth = std::array<std::optional<RigidTransform>, kPairCount>;

/// One perturbation per pair from the first schedule stage (keyed by `seed` and `frame`),
/// then `schedule.size()` refinement steps. Throws if fewer than schedule.size() stage
/// models are available.
std::vector<PairTrace> run_pipeline(const PairTruth& truth, const StageSchedule& schedule, int stage_models,
                                    const StagePredictor& predict, std::uint64_t seed, std::uint64_t frame);

/// Rows for every (active pair, stage) over all traces, in pair then stage order.
StageReport build_report(std::span<const std::vector<PairTrace>> traces);

}  // namespace trical

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
#include <utility>
#include <vector>

#include "trical/geometry.hpp"
#include "trical/random.hpp"

namespace trical {

/// Per-axis bounds of an artificial miscalibration.
struct PerturbRange {
  double max_rot_deg = 0.0;
  double max_trans_cm = 0.0;
};

/// Ordered stage ranges, largest first.
struct StageSchedule {
  std::vector<PerturbRange> stages;

  std::size_t size() const { return stages.size(); }
  void validate() const;
};

/// "five_stage" or "two_stage".
StageSchedule builtin_schedule(const std::string& name);
/// One `max_rot_deg max_trans_cm` pair per line.
StageSchedule parse_schedule(const std::string& text);
/// Builtin name or path to a schedule file.
StageSchedule load_schedule(const std::string& name_or_path);

/// Roll/pitch/yaw and x/y/z uniform per axis within the range; returns a camera-side
/// transform on `frame`.
RigidTransform sample_perturbation(const PerturbRange& r, Rng& rng, const FrameId& frame);

/// dT o T_gt.
RigidTransform miscalibrate(const RigidTransform& t_gt, const RigidTransform& dt);

enum class Pair : int { kRgb = 0, kEvent = 1 };
inline constexpr int kPairCount = 2;
const char* pair_name(Pair p);

struct DualPerturbation {
  RigidTransform rgb_init;
  RigidTransform event_init;
  RigidTransform rgb_delta;
  RigidTransform event_delta;
};

/// Independent perturbations of both pairs from disjoint substreams of (seed, tags..., pair).
DualPerturbation dual_perturb(const RigidTransform& t_rgb, const RigidTransform& t_event, const PerturbRange& r,
                              std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

}  // namespace trical

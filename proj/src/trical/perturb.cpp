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

#include "trical/perturb.hpp"

#include <filesystem>
#include <sstream>

#include "trical/io.hpp"

namespace trical {

void StageSchedule::validate() const {
  require(!stages.empty(), ErrorCode::kInvalidArgument, "schedule: at least one stage required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const PerturbRange& r = stages[i];
    require(r.max_rot_deg >= 0 && r.max_trans_cm >= 0, ErrorCode::kInvalidArgument,
            "schedule: ranges must be >= 0");
    if (i > 0) {
      require(r.max_rot_deg <= stages[i - 1].max_rot_deg && r.max_trans_cm <= stages[i - 1].max_trans_cm,
              ErrorCode::kInvalidArgument, "schedule: ranges must be non-increasing");
    }
  }
}

StageSchedule builtin_schedule(const std::string& name) {
  if (name == "five_stage") return {{{20, 150}, {10, 100}, {5, 50}, {2, 20}, {1, 10}}};
  if (name == "two_stage") return {{{10, 100}, {1, 10}}};
  throw Error(ErrorCode::kInvalidArgument, "unknown schedule '" + name + "'");
}

StageSchedule parse_schedule(const std::string& text) {
  StageSchedule s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    PerturbRange r;
    if (!(ls >> r.max_rot_deg)) continue;
    std::string extra;
    require(static_cast<bool>(ls >> r.max_trans_cm) && !(ls >> extra), ErrorCode::kParse,
            "schedule: expected 'max_rot_deg max_trans_cm' on line " + std::to_string(lineno));
    s.stages.push_back(r);
  }
  s.validate();
  return s;
}

StageSchedule load_schedule(const std::string& name_or_path) {
  if (name_or_path == "five_stage" || name_or_path == "two_stage") return builtin_schedule(name_or_path);
  require(std::filesystem::exists(name_or_path), ErrorCode::kInvalidArgument,
          "unknown schedule '" + name_or_path + "' (not a builtin name or existing file)");
  return parse_schedule(io::read_file(name_or_path));
}

RigidTransform sample_perturbation(const PerturbRange& r, Rng& rng, const FrameId& frame) {
  const double roll = rng.uniform(-r.max_rot_deg, r.max_rot_deg);
  const double pitch = rng.uniform(-r.max_rot_deg, r.max_rot_deg);
  const double yaw = rng.uniform(-r.max_rot_deg, r.max_rot_deg);
  const double m = r.max_trans_cm / 100.0;
  Vec3 t;
  t.x() = rng.uniform(-m, m);
  t.y() = rng.uniform(-m, m);
  t.z() = rng.uniform(-m, m);
  RigidTransform out;
  out.rotation = euler_to_quat(roll, pitch, yaw);
  out.translation = t;
  out.source = frame;
  out.target = frame;
  return out;
}

RigidTransform miscalibrate(const RigidTransform& t_gt, const RigidTransform& dt) { return compose(dt, t_gt); }

const char* pair_name(Pair p) { return p == Pair::kRgb ? "lidar_rgb" : "lidar_event"; }

DualPerturbation dual_perturb(const RigidTransform& t_rgb, const RigidTransform& t_event, const PerturbRange& r,
                              std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint64_t> key{stream::kPerturb};
  key.insert(key.end(), tags.begin(), tags.end());
  key.push_back(0);
  DualPerturbation out;
  key.back() = static_cast<std::uint64_t>(Pair::kRgb);
  Rng rgb_rng = Rng::substream(seed, key);
  key.back() = static_cast<std::uint64_t>(Pair::kEvent);
  Rng ev_rng = Rng::substream(seed, key);
  out.rgb_delta = sample_perturbation(r, rgb_rng, t_rgb.target);
  out.event_delta = sample_perturbation(r, ev_rng, t_event.target);
  out.rgb_init = miscalibrate(t_rgb, out.rgb_delta);
  out.event_init = miscalibrate(t_event, out.event_delta);
  return out;
}

}  // namespace trical

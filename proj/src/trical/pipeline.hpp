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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trical/costvolume.hpp"
#include "trical/dataset.hpp"
#include "trical/eval.hpp"
#include "trical/features.hpp"
#include "trical/perturb.hpp"
#include "trical/regressor.hpp"

namespace trical {

namespace fs = std::filesystem;

/// Everything a run needs besides the command and directories.
struct RunConfig {
  SceneConfig scene;
  int frames = 200;
  int train_frames = 160;
  FeatureConfig features;
  int radius = 4;
  std::size_t resample_points = 2048;
  double max_depth = 80.0;  // meters, camera-frame clip
  TrainingConfig training;
  std::vector<int> stage_epochs{30, 15};  // last entry repeats for further stages
  int growth = 8;
  int fc_width = 128;
  int head_width = 64;
  std::array<bool, kPairCount> pairs{true, true};
  int overlay_frames = 4;
  std::string schedule = "two_stage";
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  RegressorConfig regressor() const;
  int epochs_for_stage(int stage) const;  // 1-based
  std::uint64_t require_seed() const;
  void validate() const;
};

/// Applies `key=value` overrides; unknown keys are errors.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

struct DatasetFrame {
  PointCloud cloud;
  Image rgb;
  EventStream events;
  std::array<RigidTransform, kPairCount> truth;  // LiDAR to each camera
};

struct Dataset {
  std::array<Intrinsics, kPairCount> intrinsics;
  std::int64_t timestamp_us = 0;
  std::int64_t event_window_us = 0;
  double z_max = 0.0;
  std::vector<DatasetFrame> frames;
};

/// Writes frames/, manifest.txt. Returns the number of frames.
int write_dataset(const RunConfig& cfg, const fs::path& out_dir);
/// Reads and checksum-verifies a dataset directory.
Dataset read_dataset(const fs::path& dir);
/// Relative path -> crc32 listed in the manifest; throws on mismatch with the files on disk.
void verify_manifest(const fs::path& dir);

/// Per-frame inputs that do not depend on the extrinsic.
struct PreparedFrame {
  PointCloud cloud;
  std::array<FeatureMap, kPairCount> camera;
  std::array<RigidTransform, kPairCount> truth;
  std::array<Intrinsics, kPairCount> intrinsics;
};

PreparedFrame prepare_frame(const DatasetFrame& f, const Dataset& ds, const RunConfig& cfg);

/// Activated cost volume and camera-frame cloud for a LiDAR-to-camera extrinsic.
struct PairInput {
  CostVolume volume;
  PointCloud cam_cloud;
};

PairInput prepare_pair_input(const PreparedFrame& f, Pair pair, const RigidTransform& extrinsic, Rng& rng,
                             const RunConfig& cfg);

using StageModels = std::array<std::optional<Regressor>, kPairCount>;

struct TrainSummary {
  int stages = 0;
  int trained = 0;  // stages not restored from disk
  std::vector<std::string> warnings;
};

/// Checkpoints models/stage_<k>.ckpt and loss_stage_<k>.csv under `out_dir`. Stages whose
/// checkpoint and loss file already exist are restored instead of retrained.
TrainSummary run_training(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir);

fs::path checkpoint_path(const fs::path& model_dir, int stage);
StageModels load_stage_models(const fs::path& model_dir, int stage, const RunConfig& cfg);

std::string loss_curve_csv(const TrainingCurve& curve);

/// stage_report.csv and overlays/ under `out_dir`.
StageReport run_evaluation(const RunConfig& cfg, const fs::path& data_dir, const fs::path& model_dir,
                           const fs::path& out_dir);

}  // namespace trical

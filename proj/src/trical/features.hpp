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

#include <vector>

#include "trical/geometry.hpp"
#include "trical/grid.hpp"
#include "trical/projection.hpp"

namespace trical {

/// Fixed extractor settings. Defaults follow the 256x512 model input and the
/// 16x32 feature grid.
struct FeatureConfig {
  int input_width = 512;
  int input_height = 256;
  int feature_width = 32;
  int feature_height = 16;
  int channels = 8;             // cost-volume channel dimension after fusion
  double density_radius = 1.0;  // meters

  void validate() const;
};

/// Per input channel: {pooled intensity, horizontal gradient, vertical gradient,
/// in-block standard deviation}, at feature resolution, before standardization.
Grid image_descriptors(const Image& img, int feature_width, int feature_height);

/// image_descriptors followed by per-channel standardization.
FeatureMap extract_image_features(const Image& img, const FeatureConfig& cfg);

/// Zero-mean, unit-variance per channel; constant channels become zero.
Grid standardize_channels(const Grid& g);

/// Folds or tiles channels to `n`: output k averages inputs c with c % n == k
/// (or copies input k % C when C < n).
Grid to_common_channels(const Grid& g, int n);

/// Per point: number of other points within `radius` (inclusive).
std::vector<int> neighbor_counts(const PointCloud& pc, double radius);

/// Rows of (x, y, z, range, density), each column z-scored over the cloud.
std::vector<std::vector<double>> extract_point_features(const PointCloud& cam_cloud, double density_radius);

/// Standardizes both inputs per channel and concatenates as [point | depth].
FeatureMap fuse_lidar(const FeatureMap& point_fm, const FeatureMap& depth_fm);

/// Unified LiDAR embedding for one camera: point branch through SFP, depth branch
/// through SDP and the fixed extractor, fused to `cfg.channels`.
FeatureMap lidar_embedding(const PointCloud& cam_cloud, const Intrinsics& k, const FeatureConfig& cfg);

/// Camera feature map: resize to model input, extract, fold to `cfg.channels`.
FeatureMap camera_embedding(const Image& img, const FeatureConfig& cfg);

}  // namespace trical

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
#include <vector>

#include "trical/geometry.hpp"
#include "trical/grid.hpp"
#include "trical/random.hpp"

namespace trical {

namespace frames {
inline const FrameId kLidar = "lidar";
inline const FrameId kRgb = "rgb";
inline const FrameId kEvent = "event";
}  // namespace frames

struct Event {
  std::int64_t t = 0;  // microseconds
  int x = 0;
  int y = 0;
  int polarity = 1;  // +1 or -1
};

struct EventStream {
  std::vector<Event> events;
  int width = 0;
  int height = 0;

  /// Throws on decreasing timestamps, bad polarity or out-of-sensor pixels.
  void validate() const;
};

/// Points in camera frame with 0 < z <= z_max after applying `to_camera`.
PointCloud clip_points(const PointCloud& pc, const RigidTransform& to_camera, double z_max);

/// Exactly `n` points: a sorted random subset when downsampling, all inputs plus
/// uniformly drawn duplicates when upsampling, the input itself when sizes match.
PointCloud resample_points(const PointCloud& pc, std::size_t n, Rng& rng);

/// Two-channel count image: channel 0 positive, channel 1 negative polarity.
/// Events with t in [t_center - window/2, t_center - window/2 + window) are counted.
Image accumulate_events(const EventStream& es, std::int64_t t_center, std::int64_t window,
                        int width, int height);

/// out[c] = (in[c] - mean[c]) / std[c].
Image standardize_image(const Image& img, const std::array<double, 3>& mean,
                        const std::array<double, 3>& std);
Image unstandardize_image(const Image& img, const std::array<double, 3>& mean,
                          const std::array<double, 3>& std);

namespace channel_stats {
inline constexpr std::array<double, 3> kKittiMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kKittiStd{0.229, 0.224, 0.225};
inline constexpr std::array<double, 3> kDsecMean{0.265, 0.283, 0.300};
inline constexpr std::array<double, 3> kDsecStd{0.245, 0.270, 0.301};
}  // namespace channel_stats

struct SceneConfig {
  int point_count = 5000;
  double z_min = 2.0;
  double z_max = 40.0;
  int width = 640;
  int height = 320;
  double fx = 320.0;
  double fy = 320.0;
  double cx = 320.0;
  double cy = 160.0;
  std::uint64_t seed = 42;
  double motion_px = 2.0;
  int objects = 12;
  double event_threshold = 0.05;
  int events_per_pixel = 1;  // cap on events emitted per pixel
  int splat_radius = 2;
  std::int64_t timestamp_us = 50000;
  std::int64_t event_window_us = 50000;

  Intrinsics intrinsics() const { return {fx, fy, cx, cy, width, height}; }
  void validate() const;
};

/// Ground-truth LiDAR-to-RGB extrinsic used by the generator (vehicle-style axes).
RigidTransform default_lidar_to_rgb();
/// Known, fixed RGB-to-event camera extrinsic.
RigidTransform default_rgb_to_event();

struct SyntheticFrame {
  PointCloud cloud;  // LiDAR frame
  Image rgb;         // 3 channels, values in [0, 1]
  EventStream events;
  std::int64_t timestamp_us = 0;
  RigidTransform lidar_to_rgb;
  RigidTransform lidar_to_event;
  Intrinsics k_rgb;
  Intrinsics k_event;
};

SyntheticFrame synth_scene(const SceneConfig& cfg, Rng& rng);

/// Fraction of cloud points that project inside the camera image.
double visible_fraction(const PointCloud& lidar_cloud, const RigidTransform& to_camera,
                        const Intrinsics& k);

}  // namespace trical

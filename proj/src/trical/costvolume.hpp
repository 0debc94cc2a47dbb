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

#include "trical/grid.hpp"

namespace trical {

/// Correlation volume: M = (2d+1)^2 channels. Channel m = (dy + d) * (2d + 1) + (dx + d),
/// i.e. row-major over (dy, dx) starting at (-d, -d).
struct CostVolume {
  Grid volume;
  int radius = 0;

  int displacements() const { return (2 * radius + 1) * (2 * radius + 1); }
  static int channel_of(int dx, int dy, int radius) { return (dy + radius) * (2 * radius + 1) + (dx + radius); }
};

/// cost(y, x, dx, dy) = (1/C) sum_c lidar[c, y, x] * camera[c, y + dy, x + dx]; zero outside the map.
CostVolume correlate(const FeatureMap& lidar, const FeatureMap& camera, int radius);

inline constexpr double kLeakySlope = 0.1;

CostVolume leaky_relu(const CostVolume& cv, double slope = kLeakySlope);

}  // namespace trical

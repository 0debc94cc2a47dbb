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

#include "trical/costvolume.hpp"

#include <algorithm>

namespace trical {

CostVolume correlate(const FeatureMap& lidar, const FeatureMap& camera, int radius) {
  require(lidar.same_shape(camera), ErrorCode::kInvalidArgument, "correlate: feature map shape mismatch");
  require(lidar.channels() >= 1, ErrorCode::kInvalidArgument, "correlate: no channels");
  require(radius >= 0, ErrorCode::kInvalidArgument, "correlate: radius must be >= 0");
  const int h = lidar.height();
  const int w = lidar.width();
  const int channels = lidar.channels();
  const double inv_c = 1.0 / channels;
  CostVolume cv{Grid((2 * radius + 1) * (2 * radius + 1), h, w), radius};

  // Accumulate per displacement over channels so the inner loop runs along x.
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int m = CostVolume::channel_of(dx, dy, radius);
      const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      for (int c = 0; c < channels; ++c) {
        for (int y = y0; y < y1; ++y) {
          const double* a = lidar.plane(c).data() + static_cast<std::size_t>(y) * w;
          const double* b = camera.plane(c).data() + static_cast<std::size_t>(y + dy) * w;
          double* out = &cv.volume.at(m, y, 0);
          for (int x = x0; x < x1; ++x) out[x] += a[x] * b[x + dx];
        }
      }
      for (int y = y0; y < y1; ++y) {
        double* out = &cv.volume.at(m, y, 0);
        for (int x = x0; x < x1; ++x) out[x] *= inv_c;
      }
    }
  }
  return cv;
}

CostVolume leaky_relu(const CostVolume& cv, double slope) {
  require(slope > 0 && slope < 1, ErrorCode::kInvalidArgument, "leaky_relu: slope must be in (0, 1)");
  CostVolume out = cv;
  for (double& v : out.volume.data())
    if (v < 0) v *= slope;
  return out;
}

}  // namespace trical

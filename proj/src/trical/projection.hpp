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
#include <optional>
#include <vector>

#include "trical/geometry.hpp"
#include "trical/grid.hpp"

namespace trical {

/// Intrinsics rescaled to a target resolution: K' = diag(w'/W, h'/H, 1) * K.
struct ScaledIntrinsics {
  Intrinsics k;          // scaled values; width/height are the target size
  double scale_x = 1.0;  // w' / W
  double scale_y = 1.0;  // h' / H
};

ScaledIntrinsics scale_intrinsics(const Intrinsics& k, int w_out, int h_out);

struct Pixel {
  int u = 0;
  int v = 0;
};

/// Pinhole projection with round-half-away-from-zero; nullopt when z <= 0 or off-image.
std::optional<Pixel> project_pixel(const Vec3& p, const Intrinsics& k, int width, int height);

/// Scaled depth projection. Nearest depth wins; ties keep the lowest point index.
DepthMap project_depth(const PointCloud& cam_cloud, const ScaledIntrinsics& k, int width, int height);

/// Scaled feature projection of per-point feature rows (point count x C, row-major).
/// Uses the same z-buffer rule as project_depth; empty pixels are zero.
Grid project_features(const PointCloud& cam_cloud, const std::vector<std::vector<double>>& features,
                      const ScaledIntrinsics& k, int width, int height);

/// Bilinear resize with half-pixel centers (align_corners = false), edge-clamped.
Image resize_bilinear(const Image& img, int w_out, int h_out);

/// 256-entry colormap for depth overlays.
const std::vector<std::array<unsigned char, 3>>& depth_colormap();

/// Grayscale of `background` with projected points drawn in colormap order (near = low index).
Image render_overlay(const Image& background, const PointCloud& cam_cloud, const ScaledIntrinsics& k,
                     double z_max);

}  // namespace trical

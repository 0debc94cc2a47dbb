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

#include "trical/features.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

namespace trical {

void FeatureConfig::validate() const {
  require(input_width >= feature_width && input_height >= feature_height && feature_width >= 1 &&
              feature_height >= 1,
          ErrorCode::kInvalidArgument, "features: feature grid must not exceed model input");
  require(channels >= 2 && channels % 2 == 0, ErrorCode::kInvalidArgument,
          "features: channel count must be even and >= 2");
  require(density_radius > 0, ErrorCode::kInvalidArgument, "features: density radius must be > 0");
}

Grid image_descriptors(const Image& img, int fw, int fh) {
  require(img.width() >= fw && img.height() >= fh, ErrorCode::kInvalidArgument,
          "image_descriptors: input smaller than feature grid");
  Grid out(4 * img.channels(), fh, fw);
  std::vector<int> xb(fw + 1), yb(fh + 1);
  for (int i = 0; i <= fw; ++i) xb[i] = static_cast<int>(static_cast<long long>(i) * img.width() / fw);
  for (int i = 0; i <= fh; ++i) yb[i] = static_cast<int>(static_cast<long long>(i) * img.height() / fh);

  for (int c = 0; c < img.channels(); ++c) {
    const int ci = 4 * c;
    for (int by = 0; by < fh; ++by) {
      for (int bx = 0; bx < fw; ++bx) {
        double s = 0.0, s2 = 0.0;
        for (int y = yb[by]; y < yb[by + 1]; ++y)
          for (int x = xb[bx]; x < xb[bx + 1]; ++x) {
            const double v = img.at(c, y, x);
            s += v;
            s2 += v * v;
          }
        const double n = static_cast<double>(yb[by + 1] - yb[by]) * (xb[bx + 1] - xb[bx]);
        const double mean = s / n;
        out.at(ci, by, bx) = mean;
        out.at(ci + 3, by, bx) = std::sqrt(std::max(0.0, s2 / n - mean * mean));
      }
    }
    // Central differences on the pooled map, replicated borders.
    for (int y = 0; y < fh; ++y) {
      for (int x = 0; x < fw; ++x) {
        const int xl = std::max(x - 1, 0), xr = std::min(x + 1, fw - 1);
        const int yu = std::max(y - 1, 0), yd = std::min(y + 1, fh - 1);
        out.at(ci + 1, y, x) = 0.5 * (out.at(ci, y, xr) - out.at(ci, y, xl));
        out.at(ci + 2, y, x) = 0.5 * (out.at(ci, yd, x) - out.at(ci, yu, x));
      }
    }
  }
  return out;
}

Grid standardize_channels(const Grid& g) {
  Grid out = g;
  for (int c = 0; c < g.channels(); ++c) {
    auto p = out.plane(c);
    if (p.empty()) continue;
    double mean = 0.0;
    for (double v : p) mean += v;
    mean /= static_cast<double>(p.size());
    double var = 0.0;
    for (double v : p) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(p.size()));
    const bool flat = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (double& v : p) v = flat ? 0.0 : (v - mean) / sd;
  }
  return out;
}

FeatureMap extract_image_features(const Image& img, const FeatureConfig& cfg) {
  return standardize_channels(image_descriptors(img, cfg.feature_width, cfg.feature_height));
}

Grid to_common_channels(const Grid& g, int n) {
  require(n >= 1 && g.channels() >= 1, ErrorCode::kInvalidArgument, "to_common_channels: empty channel set");
  if (g.channels() == n) return g;
  Grid out(n, g.height(), g.width());
  for (int k = 0; k < n; ++k) {
    auto dst = out.plane(k);
    if (g.channels() < n) {
      const auto src = g.plane(k % g.channels());
      std::copy(src.begin(), src.end(), dst.begin());
      continue;
    }
    int count = 0;
    for (int c = k; c < g.channels(); c += n, ++count) {
      const auto src = g.plane(c);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    for (double& v : dst) v /= count;
  }
  return out;
}

std::vector<int> neighbor_counts(const PointCloud& pc, double radius) {
  require(radius > 0, ErrorCode::kInvalidArgument, "neighbor_counts: radius must be > 0");
  using Key = std::tuple<long long, long long, long long>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      const auto [a, b, c] = k;
      return static_cast<std::size_t>(a * 73856093LL ^ b * 19349663LL ^ c * 83492791LL);
    }
  };
  auto cell_of = [radius](const Vec3& p) {
    return Key{static_cast<long long>(std::floor(p.x() / radius)), static_cast<long long>(std::floor(p.y() / radius)),
               static_cast<long long>(std::floor(p.z() / radius))};
  };
  std::unordered_map<Key, std::vector<int>, KeyHash> cells;
  for (std::size_t i = 0; i < pc.size(); ++i) cells[cell_of(pc.points[i])].push_back(static_cast<int>(i));

  const double r2 = radius * radius;
  std::vector<int> counts(pc.size(), 0);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto [cx, cy, cz] = cell_of(pc.points[i]);
    int n = 0;
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          const auto it = cells.find(Key{cx + dx, cy + dy, cz + dz});
          if (it == cells.end()) continue;
          for (int j : it->second)
            if (j != static_cast<int>(i) && (pc.points[j] - pc.points[i]).squaredNorm() <= r2) ++n;
        }
    counts[i] = n;
  }
  return counts;
}

std::vector<std::vector<double>> extract_point_features(const PointCloud& cam_cloud, double density_radius) {
  const std::size_t n = cam_cloud.size();
  const auto density = neighbor_counts(cam_cloud, density_radius);
  std::vector<std::vector<double>> rows(n, std::vector<double>(5));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cam_cloud.points[i];
    rows[i] = {p.x(), p.y(), p.z(), p.norm(), static_cast<double>(density[i])};
  }
  for (int c = 0; c < 5 && n > 0; ++c) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    const bool flat = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (auto& r : rows) r[c] = flat ? 0.0 : (r[c] - mean) / sd;
  }
  return rows;
}

FeatureMap fuse_lidar(const FeatureMap& point_fm, const FeatureMap& depth_fm) {
  require(point_fm.width() == depth_fm.width() && point_fm.height() == depth_fm.height(),
          ErrorCode::kInvalidArgument, "fuse_lidar: spatial size mismatch");
  const Grid a = standardize_channels(point_fm);
  const Grid b = standardize_channels(depth_fm);
  FeatureMap out(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

FeatureMap lidar_embedding(const PointCloud& cam_cloud, const Intrinsics& k, const FeatureConfig& cfg) {
  const int half = cfg.channels / 2;
  const auto point_rows = extract_point_features(cam_cloud, cfg.density_radius);
  const ScaledIntrinsics k_feat = scale_intrinsics(k, cfg.feature_width, cfg.feature_height);
  const Grid point_map =
      project_features(cam_cloud, point_rows, k_feat, cfg.feature_width, cfg.feature_height);

  const ScaledIntrinsics k_input = scale_intrinsics(k, cfg.input_width, cfg.input_height);
  const DepthMap depth = project_depth(cam_cloud, k_input, cfg.input_width, cfg.input_height);
  const Grid depth_map = image_descriptors(depth, cfg.feature_width, cfg.feature_height);

  return fuse_lidar(to_common_channels(point_map, half), to_common_channels(depth_map, half));
}

FeatureMap camera_embedding(const Image& img, const FeatureConfig& cfg) {
  const Image resized = resize_bilinear(img, cfg.input_width, cfg.input_height);
  const Grid desc = image_descriptors(resized, cfg.feature_width, cfg.feature_height);
  return standardize_channels(to_common_channels(desc, cfg.channels));
}

}  // namespace trical

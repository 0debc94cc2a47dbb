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

#include "trical/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace trical {

// Generated from data/depth_colormap.txt at configure time.
extern const char* const kDepthColormapText;

ScaledIntrinsics scale_intrinsics(const Intrinsics& k, int w_out, int h_out) {
  require(w_out >= 1 && h_out >= 1, ErrorCode::kInvalidArgument, "scale_intrinsics: empty output size");
  require(k.width > 0 && k.height > 0, ErrorCode::kInvalidArgument, "scale_intrinsics: empty input size");
  ScaledIntrinsics s;
  s.scale_x = static_cast<double>(w_out) / k.width;
  s.scale_y = static_cast<double>(h_out) / k.height;
  s.k = {k.fx * s.scale_x, k.fy * s.scale_y, k.cx * s.scale_x, k.cy * s.scale_y, w_out, h_out};
  return s;
}

std::optional<Pixel> project_pixel(const Vec3& p, const Intrinsics& k, int width, int height) {
  if (!(p.z() > 0.0)) return std::nullopt;
  const double u = std::round(k.fx * p.x() / p.z() + k.cx);
  const double v = std::round(k.fy * p.y() / p.z() + k.cy);
  if (!(u >= 0 && v >= 0 && u < width && v < height)) return std::nullopt;
  return Pixel{static_cast<int>(u), static_cast<int>(v)};
}

namespace {

// Index of the winning point per pixel (-1 when empty).
std::vector<int> zbuffer(const PointCloud& cloud, const Intrinsics& k, int width, int height) {
  std::vector<int> winner(static_cast<std::size_t>(width) * height, -1);
  std::vector<double> depth(winner.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto px = project_pixel(cloud.points[i], k, width, height);
    if (!px) continue;
    const std::size_t idx = static_cast<std::size_t>(px->v) * width + px->u;
    if (cloud.points[i].z() < depth[idx]) {
      depth[idx] = cloud.points[i].z();
      winner[idx] = static_cast<int>(i);
    }
  }
  return winner;
}

}  // namespace

DepthMap project_depth(const PointCloud& cam_cloud, const ScaledIntrinsics& k, int width, int height) {
  DepthMap out(1, height, width);
  const auto winner = zbuffer(cam_cloud, k.k, width, height);
  for (std::size_t i = 0; i < winner.size(); ++i)
    if (winner[i] >= 0) out.data()[i] = cam_cloud.points[winner[i]].z();
  return out;
}

Grid project_features(const PointCloud& cam_cloud, const std::vector<std::vector<double>>& features,
                      const ScaledIntrinsics& k, int width, int height) {
  require(features.size() == cam_cloud.size(), ErrorCode::kInvalidArgument,
          "project_features: feature count does not match point count");
  const int channels = features.empty() ? 0 : static_cast<int>(features.front().size());
  for (const auto& f : features)
    require(static_cast<int>(f.size()) == channels, ErrorCode::kInvalidArgument,
            "project_features: ragged feature rows");
  Grid out(channels, height, width);
  const auto winner = zbuffer(cam_cloud, k.k, width, height);
  const std::size_t plane = out.plane_size();
  for (std::size_t i = 0; i < winner.size(); ++i) {
    if (winner[i] < 0) continue;
    const auto& f = features[winner[i]];
    for (int c = 0; c < channels; ++c) out.data()[c * plane + i] = f[c];
  }
  return out;
}

Image resize_bilinear(const Image& img, int w_out, int h_out) {
  require(w_out >= 1 && h_out >= 1, ErrorCode::kInvalidArgument, "resize_bilinear: empty output size");
  require(img.width() >= 1 && img.height() >= 1, ErrorCode::kInvalidArgument, "resize_bilinear: empty input");
  if (w_out == img.width() && h_out == img.height()) return img;

  struct Tap {
    int i0, i1;
    double a;  // weight of i1
  };
  auto taps = [](int n_in, int n_out) {
    std::vector<Tap> t(n_out);
    const double scale = static_cast<double>(n_in) / n_out;
    for (int o = 0; o < n_out; ++o) {
      const double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, n_in - 1.0);
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[o] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto tx = taps(img.width(), w_out);
  const auto ty = taps(img.height(), h_out);
  Image out(img.channels(), h_out, w_out);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h_out; ++y) {
      const Tap& vy = ty[y];
      for (int x = 0; x < w_out; ++x) {
        const Tap& vx = tx[x];
        const double top = (1 - vx.a) * img.at(c, vy.i0, vx.i0) + vx.a * img.at(c, vy.i0, vx.i1);
        const double bot = (1 - vx.a) * img.at(c, vy.i1, vx.i0) + vx.a * img.at(c, vy.i1, vx.i1);
        out.at(c, y, x) = (1 - vy.a) * top + vy.a * bot;
      }
    }
  }
  return out;
}

const std::vector<std::array<unsigned char, 3>>& depth_colormap() {
  static const std::vector<std::array<unsigned char, 3>> lut = [] {
    std::vector<std::array<unsigned char, 3>> out;
    std::istringstream in(kDepthColormapText);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      int r, g, b;
      ls >> r >> g >> b;
      out.push_back({static_cast<unsigned char>(r), static_cast<unsigned char>(g), static_cast<unsigned char>(b)});
    }
    if (out.size() != 256) throw Error(ErrorCode::kInternal, "depth colormap must have 256 entries");
    return out;
  }();
  return lut;
}

Image render_overlay(const Image& background, const PointCloud& cam_cloud, const ScaledIntrinsics& k,
                     double z_max) {
  const int w = k.k.width;
  const int h = k.k.height;
  Image base = resize_bilinear(background, w, h);
  Image out(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double g = 0.0;
      for (int c = 0; c < base.channels(); ++c) g += base.at(c, y, x);
      g = std::clamp(g / base.channels(), 0.0, 1.0) * 0.6;
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = g;
    }
  const DepthMap depth = project_depth(cam_cloud, k, w, h);
  const auto& lut = depth_colormap();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double z = depth.at(0, y, x);
      if (z <= 0) continue;
      const int idx = static_cast<int>(std::clamp(std::round(z / z_max * 255.0), 0.0, 255.0));
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = lut[idx][c] / 255.0;
    }
  return out;
}

}  // namespace trical

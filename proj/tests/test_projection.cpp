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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "trical/projection.hpp"

using namespace trical;
using namespace trical::testing;

namespace {

// For every pixel, scans all points and keeps the nearest (lowest index on ties).
std::vector<int> brute_force_winners(const PointCloud& pc, const Intrinsics& k) {
  std::vector<int> out(static_cast<std::size_t>(k.width) * k.height, -1);
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      int best = -1;
      for (std::size_t i = 0; i < pc.size(); ++i) {
        const Vec3& p = pc.points[i];
        if (p.z() <= 0) continue;
        if (round_away(k.fx * p.x() / p.z() + k.cx) != u || round_away(k.fy * p.y() / p.z() + k.cy) != v) continue;
        if (best < 0 || p.z() < pc.points[best].z()) best = static_cast<int>(i);
      }
      out[static_cast<std::size_t>(v) * k.width + u] = best;
    }
  return out;
}

const Intrinsics kFull{700.0, 690.0, 610.0, 185.0, 1240, 376};

PointCloud cloud_with_collisions(Rng& rng, std::size_t n) {
  PointCloud pc = random_frustum_cloud(rng, n, 1.0, 60.0);
  // Duplicates and points behind the camera exercise ties and rejection.
  for (std::size_t i = 0; i + 10 < n; i += 10) pc.points[i + 1] = pc.points[i];
  for (std::size_t i = 5; i < n; i += 50) pc.points[i].z() = -pc.points[i].z();
  return pc;
}

}  // namespace

TEST_CASE("scale_intrinsics examples") {
  const ScaledIntrinsics s = scale_intrinsics(kFull, 512, 256);
  CHECK(s.scale_x == 512.0 / 1240.0);
  CHECK(s.scale_y == 256.0 / 376.0);
  CHECK(s.k.fx == kFull.fx * (512.0 / 1240.0));
  CHECK(s.k.fy == kFull.fy * (256.0 / 376.0));
  CHECK(s.k.cx == kFull.cx * (512.0 / 1240.0));
  CHECK(s.k.cy == kFull.cy * (256.0 / 376.0));
  CHECK(s.k.width == 512);
  CHECK(s.k.height == 256);

  const ScaledIntrinsics same = scale_intrinsics(kFull, 1240, 376);
  CHECK(same.k.fx == kFull.fx);
  CHECK(same.k.cx == kFull.cx);

  const ScaledIntrinsics half = scale_intrinsics({100.0, 100.0, 100.0, 50.0, 200, 100}, 100, 50);
  CHECK(half.k.fx == 50.0);
}

TEST_CASE("project_depth on the principal ray and z-buffer") {
  const ScaledIntrinsics s = scale_intrinsics(kFull, 512, 256);
  const int u = static_cast<int>(round_away(s.k.cx)), v = static_cast<int>(round_away(s.k.cy));
  const DepthMap one = project_depth({{Vec3(0, 0, 5)}, "cam"}, s, 512, 256);
  CHECK(one.at(0, v, u) == 5.0);
  int nonzero = 0;
  for (double d : one.data()) nonzero += d != 0.0;
  CHECK(nonzero == 1);

  const DepthMap two = project_depth({{Vec3(0, 0, 5), Vec3(0, 0, 3)}, "cam"}, s, 512, 256);
  CHECK(two.at(0, v, u) == 3.0);
}

TEST_CASE("project_depth matches the brute-force rasterizer") {
  Rng rng = rng_for(40);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 64, 32);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud pc = cloud_with_collisions(rng, 400);
    const DepthMap d = project_depth(pc, s, 64, 32);
    const auto winners = brute_force_winners(pc, s.k);
    for (std::size_t i = 0; i < winners.size(); ++i)
      CHECK(d.data()[i] == (winners[i] < 0 ? 0.0 : pc.points[winners[i]].z()));
  }
}

TEST_CASE("project_features matches the brute-force rasterizer") {
  Rng rng = rng_for(41);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 48, 24);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud pc = cloud_with_collisions(rng, 300);
    std::vector<std::vector<double>> f(pc.size(), std::vector<double>(3));
    for (auto& row : f)
      for (double& v : row) v = rng.uniform(-2, 2);
    const Grid g = project_features(pc, f, s, 48, 24);
    REQUIRE(g.channels() == 3);
    const auto winners = brute_force_winners(pc, s.k);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < winners.size(); ++i)
        CHECK(g.plane(c)[i] == (winners[i] < 0 ? 0.0 : f[winners[i]][c]));
  }
}

TEST_CASE("project_features examples") {
  const ScaledIntrinsics s = scale_intrinsics(kFull, 512, 256);
  const Grid g = project_features({{Vec3(0.3, 0.1, 4)}, "cam"}, {{1.0, 1.0, 1.0, 1.0}}, s, 512, 256);
  int nonzero_pixels = 0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 512; ++x) nonzero_pixels += g.at(0, y, x) != 0.0;
  CHECK(nonzero_pixels == 1);
  CHECK_THROWS_AS(project_features({{Vec3(0, 0, 4)}, "cam"}, {}, s, 512, 256), Error);
}

TEST_CASE("per-pixel and pairwise oracles agree") {
  Rng rng = rng_for(47);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 64, 32);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud pc = cloud_with_collisions(rng, 300);
    CHECK(pairwise_winners(pc, s.k) == brute_force_winners(pc, s.k));
  }
}

TEST_CASE("project_features with depth as the feature reproduces project_depth") {
  Rng rng = rng_for(42);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 128, 64);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud pc = cloud_with_collisions(rng, 1000);
    std::vector<std::vector<double>> f;
    for (const auto& p : pc.points) f.push_back({p.z()});
    CHECK(project_features(pc, f, s, 128, 64).data() == project_depth(pc, s, 128, 64).data());
  }
}

TEST_CASE("every nonzero depth pixel is realized by an input point") {
  Rng rng = rng_for(43);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 128, 64);
  const PointCloud pc = cloud_with_collisions(rng, 2000);
  const DepthMap d = project_depth(pc, s, 128, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 128; ++x) {
      const double z = d.at(0, y, x);
      if (z == 0.0) continue;
      const bool found = std::any_of(pc.points.begin(), pc.points.end(), [&](const Vec3& p) {
        const auto px = project_pixel(p, s.k, 128, 64);
        return px && px->u == x && px->v == y && p.z() == z;
      });
      CHECK(found);
    }
}

TEST_CASE("scaled projection stays within half a pixel of the rescaled full-resolution coordinate") {
  Rng rng = rng_for(44);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 512, 256);
  int projected = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = random_frustum_cloud(rng, 1, 1.0, 80.0).points[0];
    const auto px = project_pixel(p, s.k, 512, 256);
    if (!px) continue;
    ++projected;
    const double u = kFull.fx * p.x() / p.z() + kFull.cx;
    const double v = kFull.fy * p.y() / p.z() + kFull.cy;
    CHECK(std::abs(px->u - u * 512.0 / 1240.0) <= 0.5 + 1e-9);
    CHECK(std::abs(px->v - v * 256.0 / 376.0) <= 0.5 + 1e-9);
  }
  CHECK(projected > 5000);
}

TEST_CASE("resize_bilinear examples") {
  Image constant(2, 5, 7, 7.0);
  for (auto [w, h] : {std::pair{3, 2}, {14, 10}, {1, 1}, {9, 4}}) {
    const Image r = resize_bilinear(constant, w, h);
    for (double v : r.data()) CHECK(v == 7.0);
  }
  Rng rng = rng_for(45);
  const Image img = random_grid(rng, 3, 6, 9);
  CHECK(resize_bilinear(img, 9, 6) == img);
}

TEST_CASE("resize_bilinear 4x4 ramp to 2x2 matches hand evaluation") {
  // v(x, y) = x + 10 y. Output centers land on input coordinates 0.5 and 2.5.
  Image ramp(1, 4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) ramp.at(0, y, x) = x + 10.0 * y;
  const Image r = resize_bilinear(ramp, 2, 2);
  CHECK(std::abs(r.at(0, 0, 0) - 5.5) < 1e-12);
  CHECK(std::abs(r.at(0, 0, 1) - 7.5) < 1e-12);
  CHECK(std::abs(r.at(0, 1, 0) - 25.5) < 1e-12);
  CHECK(std::abs(r.at(0, 1, 1) - 27.5) < 1e-12);
}

TEST_CASE("resize_bilinear preserves the value range") {
  Rng rng = rng_for(46);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(20)), w = 1 + static_cast<int>(rng.below(20));
    const Image img = random_grid(rng, 1, h, w, -3, 5);
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    const Image r = resize_bilinear(img, 1 + static_cast<int>(rng.below(40)), 1 + static_cast<int>(rng.below(40)));
    for (double v : r.data()) CHECK((v >= *lo - 1e-12 && v <= *hi + 1e-12));
  }
}

TEST_CASE("overlay size and colors") {
  CHECK(depth_colormap().size() == 256);
  Image bg(3, 376, 1240, 0.5);
  const ScaledIntrinsics s = scale_intrinsics(kFull, 512, 256);
  const Image o = render_overlay(bg, {{Vec3(0, 0, 80)}, "cam"}, s, 80.0);
  CHECK(o.width() == 512);
  CHECK(o.height() == 256);
  const int u = static_cast<int>(round_away(s.k.cx)), v = static_cast<int>(round_away(s.k.cy));
  CHECK(o.at(0, v, u) == depth_colormap()[255][0] / 255.0);
  CHECK(o.at(0, 0, 0) == doctest::Approx(0.3));
}

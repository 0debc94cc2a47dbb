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

#include "trical/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "trical/costvolume.hpp"
#include "trical/dataset.hpp"
#include "trical/eval.hpp"
#include "trical/features.hpp"
#include "trical/perturb.hpp"
#include "trical/projection.hpp"
#include "trical/regressor.hpp"

namespace trical {

namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Grid random_grid(Rng& rng, int c, int h, int w) {
  Grid g(c, h, w);
  for (double& v : g.data()) v = rng.normal();
  return g;
}

double correlation_deviation(Rng& rng) {
  const int c = 8, h = 16, w = 32, d = 4;
  const Grid a = random_grid(rng, c, h, w), b = random_grid(rng, c, h, w);
  const CostVolume cv = correlate(a, b, d);
  double worst = 0.0;
  for (int dy = -d; dy <= d; ++dy)
    for (int dx = -d; dx <= d; ++dx)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double s = 0.0;
          for (int k = 0; k < c; ++k) {
            const int yy = y + dy, xx = x + dx;
            if (yy >= 0 && yy < h && xx >= 0 && xx < w) s += a.at(k, y, x) * b.at(k, yy, xx);
          }
          const int m = (dy + d) * (2 * d + 1) + (dx + d);
          worst = std::max(worst, std::abs(s / c - cv.volume.at(m, y, x)));
        }
  return worst;
}

// Per-pixel scan over all points; nearest wins, earlier index on ties.
DepthMap brute_depth(const PointCloud& pc, const Intrinsics& k) {
  DepthMap out(1, k.height, k.width);
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& p : pc.points) {
        if (p.z() <= 0) continue;
        const double pu = k.fx * p.x() / p.z() + k.cx, pv = k.fy * p.y() / p.z() + k.cy;
        if (std::round(pu) == u && std::round(pv) == v && p.z() < best) best = p.z();
      }
      if (std::isfinite(best)) out.at(0, v, u) = best;
    }
  return out;
}

}  // namespace

bool run_oracles(std::uint64_t seed, const OracleSink& sink) {
  bool all = true;
  auto report = [&](std::string name, bool ok, std::string detail) {
    all = all && ok;
    sink({std::move(name), ok, std::move(detail)});
  };
  Rng rng = Rng::substream(seed, {stream::kTest, 7});

  {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, correlation_deviation(rng));
    report("cost volume vs triple loop", worst < 1e-12, fmt("max |dev| = %.3g", worst));
  }
  {
    bool ok = true;
    for (int t = 0; t < 5; ++t) {
      PointCloud pc;
      for (int i = 0; i < 300; ++i)
        pc.points.emplace_back(rng.uniform(-10, 10), rng.uniform(-5, 5), rng.uniform(-1, 30));
      const Intrinsics k{320, 320, 320, 160, 640, 320};
      const ScaledIntrinsics s = scale_intrinsics(k, 64, 32);
      ok = ok && project_depth(pc, s, 64, 32) == brute_depth(pc, s.k);
    }
    report("depth projection vs per-pixel scan", ok, "5 clouds of 300 points at 64x32");
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      std::vector<RigidTransform> deltas;
      RigidTransform est = RigidTransform::identity("cam");
      Mat4 m = Mat4::Identity();
      for (int i = 0; i < 5; ++i) {
        RigidTransform d = sample_perturbation({20, 150}, rng, "cam");
        est = compose(d, est);
        m = d.to_matrix() * m;
      }
      worst = std::max(worst, (est.to_matrix() - m).cwiseAbs().maxCoeff());
    }
    report("refinement telescope vs matrix chain", worst < 1e-9, fmt("max |dev| = %.3g", worst));
  }
  {
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      Rng r = Rng::substream(seed, {stream::kTest, 8, static_cast<std::uint64_t>(i)});
      const RigidTransform d = sample_perturbation({20, 150}, r, "cam");
      const EulerAngles e = quat_to_euler(d.rotation);
      ok = ok && std::abs(e.roll) <= 20 + 1e-9 && std::abs(e.pitch) <= 20 + 1e-9 && std::abs(e.yaw) <= 20 + 1e-9 &&
           d.translation.cwiseAbs().maxCoeff() <= 1.5;
    }
    report("perturbation bounds", ok, "10000 samples at 20 deg / 150 cm");
  }
  {
    PointCloud pc;
    for (int i = 0; i < 400; ++i) pc.points.emplace_back(rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5));
    const auto fast = neighbor_counts(pc, 1.0);
    bool ok = true;
    for (std::size_t i = 0; i < pc.size(); ++i) {
      int n = 0;
      for (std::size_t j = 0; j < pc.size(); ++j)
        if (i != j && (pc.points[i] - pc.points[j]).squaredNorm() <= 1.0) ++n;
      ok = ok && n == fast[i];
    }
    report("neighbor counts vs all pairs", ok, "400 points");
  }
  {
    EventStream es{{}, 16, 8};
    for (int i = 0; i < 500; ++i)
      es.events.push_back({static_cast<std::int64_t>(i * 20), static_cast<int>(rng.below(16)),
                           static_cast<int>(rng.below(8)), rng.below(2) ? 1 : -1});
    const Image img = accumulate_events(es, 5000, 4000, 16, 8);
    bool ok = true;
    for (int c = 0; c < 2; ++c)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) {
          int n = 0;
          for (const Event& e : es.events)
            if (e.t >= 3000 && e.t < 7000 && e.x == x && e.y == y && (e.polarity > 0) == (c == 0)) ++n;
          ok = ok && img.at(c, y, x) == n;
        }
    report("event accumulation vs per-pixel count", ok, "500 events");
  }
  {
    const Vec3 a(0.10, 0.20, 0.30), b(0.13, 0.24, 0.30);
    const std::vector<Vec3> pa{a}, pb{b};
    const Quaternion q = euler_to_quat(3, -4, 5);
    const std::vector<Quaternion> qa{q}, qb{-q};
    const bool ok = std::abs(metric_et(pa, pb) - 5.0) < 1e-12 && metric_er(qa, qb) == 0.0;
    report("metric identities", ok, "3-4-5 cm and sign flip");
  }
  {
    const GradCheckResult g = gradient_check(seed, LossWeights{});
    report("regressor gradients vs central differences", g.max_rel_error < 1e-4,
           fmt("max rel err = %.3g", g.max_rel_error) + " (" + g.worst_tensor + ")");
  }
  return all;
}

bool run_gradchecks(std::uint64_t seed, int seeds, const OracleSink& sink, double* max_rel_error) {
  bool all = true;
  double worst = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    const GradCheckResult g = gradient_check(s, LossWeights{});
    worst = std::max(worst, g.max_rel_error);
    const bool ok = g.max_rel_error < 1e-4;
    all = all && ok;
    sink({"seed " + std::to_string(s), ok,
          fmt("max rel err = %.3g", g.max_rel_error) + " over " + std::to_string(g.checked) + " params (" +
              g.worst_tensor + ")"});
  }
  if (max_rel_error) *max_rel_error = worst;
  return all;
}

}  // namespace trical

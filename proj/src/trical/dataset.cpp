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

#include "trical/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

namespace trical {

void EventStream::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    require(i == 0 || events[i - 1].t <= e.t, ErrorCode::kParse, "non-monotone timestamps");
    require(e.polarity == 1 || e.polarity == -1, ErrorCode::kParse, "event polarity must be +1 or -1");
    require(e.x >= 0 && e.y >= 0 && (width <= 0 || e.x < width) && (height <= 0 || e.y < height),
            ErrorCode::kParse, "event outside sensor");
  }
}

PointCloud clip_points(const PointCloud& pc, const RigidTransform& to_camera, double z_max) {
  require(z_max > 0, ErrorCode::kInvalidArgument, "clip_points: z_max must be > 0");
  PointCloud cam = apply(to_camera, pc);
  std::erase_if(cam.points, [z_max](const Vec3& p) { return !(p.z() > 0.0 && p.z() <= z_max); });
  require(!cam.empty(), ErrorCode::kInvalidArgument, "no visible points");
  return cam;
}

PointCloud resample_points(const PointCloud& pc, std::size_t n, Rng& rng) {
  require(!pc.empty(), ErrorCode::kInvalidArgument, "resample_points: empty cloud");
  require(n >= 1, ErrorCode::kInvalidArgument, "resample_points: n must be >= 1");
  PointCloud out;
  out.frame = pc.frame;
  const std::size_t m = pc.size();
  if (m == n) {
    out.points = pc.points;
  } else if (m > n) {
    // Partial Fisher-Yates over indices; keep the chosen subset in input order.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.below(m - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    out.points.reserve(n);
    for (std::size_t i : idx) out.points.push_back(pc.points[i]);
  } else {
    out.points = pc.points;
    out.points.reserve(n);
    for (std::size_t i = m; i < n; ++i) out.points.push_back(pc.points[rng.below(m)]);
  }
  return out;
}

Image accumulate_events(const EventStream& es, std::int64_t t_center, std::int64_t window,
                        int width, int height) {
  require(window > 0, ErrorCode::kInvalidArgument, "accumulate_events: window must be > 0");
  Image img(2, height, width);
  const std::int64_t lo = t_center - window / 2;
  const std::int64_t hi = lo + window;
  auto first = std::lower_bound(es.events.begin(), es.events.end(), lo,
                                [](const Event& e, std::int64_t t) { return e.t < t; });
  for (auto it = first; it != es.events.end() && it->t < hi; ++it) {
    if (it->x < 0 || it->y < 0 || it->x >= width || it->y >= height) continue;
    img.at(it->polarity > 0 ? 0 : 1, it->y, it->x) += 1.0;
  }
  return img;
}

Image standardize_image(const Image& img, const std::array<double, 3>& mean,
                        const std::array<double, 3>& std) {
  require(img.channels() == 3, ErrorCode::kInvalidArgument, "standardize_image: expected 3 channels");
  for (double s : std) require(s > 0, ErrorCode::kInvalidArgument, "standardize_image: std must be > 0");
  Image out = img;
  for (int c = 0; c < 3; ++c)
    for (double& v : out.plane(c)) v = (v - mean[c]) / std[c];
  return out;
}

Image unstandardize_image(const Image& img, const std::array<double, 3>& mean,
                          const std::array<double, 3>& std) {
  require(img.channels() == 3, ErrorCode::kInvalidArgument, "unstandardize_image: expected 3 channels");
  Image out = img;
  for (int c = 0; c < 3; ++c)
    for (double& v : out.plane(c)) v = v * std[c] + mean[c];
  return out;
}

void SceneConfig::validate() const {
  require(point_count >= 1, ErrorCode::kInvalidArgument, "scene: point_count must be >= 1");
  require(z_min > 0 && z_max > z_min, ErrorCode::kInvalidArgument,
          "scene: depth range must satisfy 0 < z_min < z_max");
  intrinsics().validate();
  require(motion_px >= 0, ErrorCode::kInvalidArgument, "scene: motion_px must be >= 0");
  require(objects >= 0, ErrorCode::kInvalidArgument, "scene: objects must be >= 0");
  require(event_threshold > 0, ErrorCode::kInvalidArgument, "scene: event_threshold must be > 0");
  require(events_per_pixel >= 1, ErrorCode::kInvalidArgument, "scene: events_per_pixel must be >= 1");
  require(splat_radius >= 0, ErrorCode::kInvalidArgument, "scene: splat_radius must be >= 0");
  require(event_window_us > 0, ErrorCode::kInvalidArgument, "scene: event window must be > 0");
}

RigidTransform default_lidar_to_rgb() {
  // LiDAR x-forward/y-left/z-up into camera x-right/y-down/z-forward.
  Mat3 r;
  r << 0, -1, 0,
       0, 0, -1,
       1, 0, 0;
  const Eigen::Quaterniond q(r);
  RigidTransform t;
  t.rotation = quat_normalize({q.w(), q.x(), q.y(), q.z()});
  t.translation = Vec3(0.06, -0.08, -0.27);
  t.source = frames::kLidar;
  t.target = frames::kRgb;
  return t;
}

RigidTransform default_rgb_to_event() {
  RigidTransform t;
  t.rotation = euler_to_quat(0.3, -0.5, 0.2);
  t.translation = Vec3(-0.05, 0.0, 0.01);
  t.source = frames::kRgb;
  t.target = frames::kEvent;
  return t;
}

namespace {

struct Splat {
  Vec3 p;          // camera frame
  double shade;    // per-channel base intensity
  std::array<double, 3> tint;
};

// Z-buffered disc splatting over a smooth background gradient.
Image render(const std::vector<Splat>& splats, const Intrinsics& k, int radius, int channels) {
  Image img(channels, k.height, k.width);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x)
        img.at(c, y, x) = 0.10 + 0.10 * x / k.width + 0.05 * y / k.height + 0.02 * c;
  std::vector<double> zbuf(static_cast<std::size_t>(k.width) * k.height,
                           std::numeric_limits<double>::infinity());
  for (const Splat& s : splats) {
    if (s.p.z() <= 0) continue;
    const double u = std::round(k.fx * s.p.x() / s.p.z() + k.cx);
    const double v = std::round(k.fy * s.p.y() / s.p.z() + k.cy);
    if (u < -radius || v < -radius || u >= k.width + radius || v >= k.height + radius) continue;
    const int ui = static_cast<int>(u);
    const int vi = static_cast<int>(v);
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        if (dx * dx + dy * dy > radius * radius) continue;
        const int x = ui + dx;
        const int y = vi + dy;
        if (x < 0 || y < 0 || x >= k.width || y >= k.height) continue;
        double& zb = zbuf[static_cast<std::size_t>(y) * k.width + x];
        if (s.p.z() >= zb) continue;
        zb = s.p.z();
        for (int c = 0; c < channels; ++c)
          img.at(c, y, x) = channels == 1 ? s.shade : s.shade * s.tint[c];
      }
    }
  }
  return img;
}

}  // namespace

SyntheticFrame synth_scene(const SceneConfig& cfg, Rng& rng) {
  cfg.validate();
  const Intrinsics k = cfg.intrinsics();
  SyntheticFrame f;
  f.timestamp_us = cfg.timestamp_us;
  f.k_rgb = k;
  f.k_event = k;
  f.lidar_to_rgb = default_lidar_to_rgb();
  f.lidar_to_event = compose(default_rgb_to_event(), f.lidar_to_rgb);

  struct Patch {
    double u0, v0, half_w, half_h, z, slope_u, slope_v, albedo;
    std::array<double, 3> tint;
  };
  const double log_ratio = std::log(cfg.z_max / cfg.z_min);
  std::vector<Patch> patches;
  for (int i = 0; i < cfg.objects; ++i) {
    Patch p;
    p.u0 = rng.uniform(0.0, k.width);
    p.v0 = rng.uniform(0.0, k.height);
    p.half_w = rng.uniform(0.04, 0.15) * k.width;
    p.half_h = rng.uniform(0.06, 0.25) * k.height;
    p.z = cfg.z_min * std::exp(rng.uniform() * log_ratio);
    p.slope_u = rng.uniform(-0.3, 0.3);
    p.slope_v = rng.uniform(-0.3, 0.3);
    p.albedo = rng.uniform(0.6, 1.0);
    for (double& t : p.tint) t = rng.uniform(0.8, 1.0);
    patches.push_back(p);
  }

  auto shade_of = [&](double z) {
    const double s = std::log(z / cfg.z_min) / log_ratio;
    return 0.25 + 0.75 * (1.0 - std::clamp(s, 0.0, 1.0));
  };

  // Points are sampled in the RGB frustum, 80% on patches and the rest as clutter.
  std::vector<Splat> splats;
  splats.reserve(cfg.point_count);
  for (int i = 0; i < cfg.point_count; ++i) {
    double u, v, z, albedo = 1.0;
    std::array<double, 3> tint{1.0, 1.0, 1.0};
    if (!patches.empty() && rng.uniform() < 0.8) {
      const Patch& p = patches[rng.below(patches.size())];
      const double a = rng.uniform(-1.0, 1.0);
      const double b = rng.uniform(-1.0, 1.0);
      u = std::clamp(p.u0 + a * p.half_w, 0.0, k.width - 1.0);
      v = std::clamp(p.v0 + b * p.half_h, 0.0, k.height - 1.0);
      z = std::clamp(p.z * (1.0 + p.slope_u * a * 0.2 + p.slope_v * b * 0.2), cfg.z_min, cfg.z_max);
      albedo = p.albedo;
      tint = p.tint;
    } else {
      u = rng.uniform(0.0, k.width - 1.0);
      v = rng.uniform(0.0, k.height - 1.0);
      z = cfg.z_min * std::exp(rng.uniform() * log_ratio);
    }
    const Vec3 cam((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
    splats.push_back({cam, shade_of(z) * albedo, tint});
  }

  f.cloud.frame = frames::kLidar;
  f.cloud.points.reserve(splats.size());
  const RigidTransform rgb_to_lidar = inverse(f.lidar_to_rgb);
  for (const Splat& s : splats) f.cloud.points.push_back(rgb_to_lidar(s.p));

  f.rgb = render(splats, k, cfg.splat_radius, 3);

  // Event camera: render before/after a small virtual yaw and threshold log-intensity changes.
  const RigidTransform rgb_to_event = default_rgb_to_event();
  const double yaw = std::atan2(cfg.motion_px, k.fx);
  const Quaternion motion{std::cos(0.5 * yaw), 0.0, std::sin(0.5 * yaw), 0.0};
  std::vector<Splat> ev0 = splats;
  std::vector<Splat> ev1 = splats;
  for (std::size_t i = 0; i < splats.size(); ++i) {
    ev0[i].p = rgb_to_event(splats[i].p);
    ev1[i].p = motion.rotate(ev0[i].p);
  }
  const Image i0 = render(ev0, f.k_event, cfg.splat_radius, 1);
  const Image i1 = render(ev1, f.k_event, cfg.splat_radius, 1);

  f.events.width = f.k_event.width;
  f.events.height = f.k_event.height;
  const std::int64_t lo = cfg.timestamp_us - cfg.event_window_us / 2;
  for (int y = 0; y < f.k_event.height; ++y) {
    for (int x = 0; x < f.k_event.width; ++x) {
      const double d = std::log(i1.at(0, y, x) + 1e-3) - std::log(i0.at(0, y, x) + 1e-3);
      const int n = std::min(cfg.events_per_pixel, static_cast<int>(std::abs(d) / cfg.event_threshold));
      for (int e = 0; e < n; ++e) {
        const auto t = lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.event_window_us)));
        f.events.events.push_back({t, x, y, d > 0 ? 1 : -1});
      }
    }
  }
  std::stable_sort(f.events.events.begin(), f.events.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return f;
}

double visible_fraction(const PointCloud& lidar_cloud, const RigidTransform& to_camera,
                        const Intrinsics& k) {
  if (lidar_cloud.empty()) return 0.0;
  std::size_t inside = 0;
  for (const Vec3& p : lidar_cloud.points) {
    const Vec3 c = to_camera(p);
    if (c.z() <= 0) continue;
    const double u = std::round(k.fx * c.x() / c.z() + k.cx);
    const double v = std::round(k.fy * c.y() / c.z() + k.cy);
    if (u >= 0 && v >= 0 && u < k.width && v < k.height) ++inside;
  }
  return static_cast<double>(inside) / lidar_cloud.size();
}

}  // namespace trical

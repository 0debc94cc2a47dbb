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

#include "trical/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "trical/io.hpp"
#include "trical/parallel.hpp"
#include "trical/projection.hpp"

namespace trical {

namespace {

constexpr const char* kManifestName = "manifest.txt";
constexpr const char* kDatasetFormat = "trical-dataset-1";

struct BadValue {};

template <typename T>
T parse_value(const std::string& text) {
  T out{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end || text.empty()) throw BadValue{};
  return out;
}

template <typename T>
T parse_field(const std::string& key, const std::string& text) {
  try {
    return parse_value<T>(text);
  } catch (const BadValue&) {
    throw Error(ErrorCode::kParse, "manifest: bad value for '" + key + "': '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string frame_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf;
}

std::string format_intrinsics(const Intrinsics& k) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %d %d", k.fx, k.fy, k.cx, k.cy, k.width, k.height);
  return buf;
}

Intrinsics parse_intrinsics(const std::string& text) {
  Intrinsics k;
  std::istringstream in(text);
  require(static_cast<bool>(in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height), ErrorCode::kParse,
          "manifest: malformed intrinsics '" + text + "'");
  k.validate();
  return k;
}

const FrameId& camera_frame(Pair p) { return p == Pair::kRgb ? frames::kRgb : frames::kEvent; }

std::string format_crc(std::uint32_t crc, std::size_t size) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%08x %zu", crc, size);
  return buf;
}

void write_with_checksum(const fs::path& dir, const std::string& rel, const std::string& bytes, std::string& line) {
  io::write_file(dir / rel, bytes);
  line = rel + "=" + format_crc(io::crc32(bytes), bytes.size()) + "\n";
}

Image event_background(const EventStream& es, const Dataset& ds) {
  const Intrinsics& k = ds.intrinsics[static_cast<int>(Pair::kEvent)];
  const Image counts = accumulate_events(es, ds.timestamp_us, ds.event_window_us, k.width, k.height);
  Image out(3, k.height, k.width);
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      const double v = std::clamp(0.5 + 0.25 * (counts.at(0, y, x) - counts.at(1, y, x)), 0.0, 1.0);
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = v;
    }
  return out;
}

}  // namespace

RegressorConfig RunConfig::regressor() const {
  RegressorConfig r;
  r.cost_channels = (2 * radius + 1) * (2 * radius + 1);
  r.height = features.feature_height;
  r.width = features.feature_width;
  r.growth = growth;
  r.fc_width = fc_width;
  r.head_width = head_width;
  return r;
}

int RunConfig::epochs_for_stage(int stage) const {
  require(stage >= 1, ErrorCode::kInvalidArgument, "stage index must be >= 1");
  return stage_epochs[std::min<std::size_t>(static_cast<std::size_t>(stage - 1), stage_epochs.size() - 1)];
}

std::uint64_t RunConfig::require_seed() const {
  require(seed.has_value(), ErrorCode::kInvalidArgument, "a seed is required (--seed or seed= in the config)");
  return *seed;
}

void RunConfig::validate() const {
  scene.validate();
  features.validate();
  training.validate();
  regressor().validate();
  require(frames >= 1, ErrorCode::kInvalidArgument, "config: frames must be >= 1");
  require(train_frames >= 0 && train_frames <= frames, ErrorCode::kInvalidArgument,
          "config: train_frames must be in [0, frames]");
  require(radius >= 0, ErrorCode::kInvalidArgument, "config: radius must be >= 0");
  require(resample_points >= 1, ErrorCode::kInvalidArgument, "config: resample_points must be >= 1");
  require(max_depth > 0, ErrorCode::kInvalidArgument, "config: max_depth must be > 0");
  require(!stage_epochs.empty(), ErrorCode::kInvalidArgument, "config: epochs list is empty");
  for (int e : stage_epochs) require(e >= 0, ErrorCode::kInvalidArgument, "config: epochs must be >= 0");
  require(pairs[0] || pairs[1], ErrorCode::kInvalidArgument, "config: at least one pair must be enabled");
  require(jobs >= 1, ErrorCode::kInvalidArgument, "config: jobs must be >= 1");
  require(overlay_frames >= 0, ErrorCode::kInvalidArgument, "config: overlay_frames must be >= 0");
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& v) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  auto d = [](double SceneConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& s) { c.scene.*m = parse_value<double>(s); });
  };
  auto i = [](int SceneConfig::*m) {
    return Setter([m](RunConfig& c, const std::string& s) { c.scene.*m = parse_value<int>(s); });
  };
  static const std::map<std::string, Setter> setters = {
      {"point_count", i(&SceneConfig::point_count)},
      {"z_min", d(&SceneConfig::z_min)},
      {"z_max", d(&SceneConfig::z_max)},
      {"width", i(&SceneConfig::width)},
      {"height", i(&SceneConfig::height)},
      {"fx", d(&SceneConfig::fx)},
      {"fy", d(&SceneConfig::fy)},
      {"cx", d(&SceneConfig::cx)},
      {"cy", d(&SceneConfig::cy)},
      {"motion_px", d(&SceneConfig::motion_px)},
      {"objects", i(&SceneConfig::objects)},
      {"event_threshold", d(&SceneConfig::event_threshold)},
      {"splat_radius", i(&SceneConfig::splat_radius)},
      {"events_per_pixel", i(&SceneConfig::events_per_pixel)},
      {"timestamp_us", [](RunConfig& c, const std::string& s) { c.scene.timestamp_us = parse_value<std::int64_t>(s); }},
      {"event_window_us",
       [](RunConfig& c, const std::string& s) { c.scene.event_window_us = parse_value<std::int64_t>(s); }},
      {"frames", [](RunConfig& c, const std::string& s) { c.frames = parse_value<int>(s); }},
      {"train_frames", [](RunConfig& c, const std::string& s) { c.train_frames = parse_value<int>(s); }},
      {"radius", [](RunConfig& c, const std::string& s) { c.radius = parse_value<int>(s); }},
      {"resample_points",
       [](RunConfig& c, const std::string& s) { c.resample_points = parse_value<std::size_t>(s); }},
      {"max_depth", [](RunConfig& c, const std::string& s) { c.max_depth = parse_value<double>(s); }},
      {"feature_channels", [](RunConfig& c, const std::string& s) { c.features.channels = parse_value<int>(s); }},
      {"density_radius",
       [](RunConfig& c, const std::string& s) { c.features.density_radius = parse_value<double>(s); }},
      {"growth", [](RunConfig& c, const std::string& s) { c.growth = parse_value<int>(s); }},
      {"fc_width", [](RunConfig& c, const std::string& s) { c.fc_width = parse_value<int>(s); }},
      {"head_width", [](RunConfig& c, const std::string& s) { c.head_width = parse_value<int>(s); }},
      {"batch_size", [](RunConfig& c, const std::string& s) { c.training.batch_size = parse_value<int>(s); }},
      {"learning_rate",
       [](RunConfig& c, const std::string& s) { c.training.learning_rate = parse_value<double>(s); }},
      {"milestones",
       [](RunConfig& c, const std::string& s) {
         c.training.milestones.clear();
         for (const auto& m : split_list(s)) c.training.milestones.push_back(parse_value<int>(m));
       }},
      {"epochs",
       [](RunConfig& c, const std::string& s) {
         c.stage_epochs.clear();
         for (const auto& e : split_list(s)) c.stage_epochs.push_back(parse_value<int>(e));
       }},
      {"lambda_t", [](RunConfig& c, const std::string& s) { c.training.weights.lambda_t = parse_value<double>(s); }},
      {"lambda_r", [](RunConfig& c, const std::string& s) { c.training.weights.lambda_r = parse_value<double>(s); }},
      {"w", [](RunConfig& c, const std::string& s) { c.training.weights.w = parse_value<double>(s); }},
      {"optimizer",
       [](RunConfig& c, const std::string& s) {
         if (s == "sgd")
           c.training.optimizer = OptimizerKind::kSgd;
         else if (s == "adam")
           c.training.optimizer = OptimizerKind::kAdam;
         else
           throw Error(ErrorCode::kParse, "config: optimizer must be sgd or adam, got '" + s + "'");
       }},
      {"pairs",
       [](RunConfig& c, const std::string& s) {
         c.pairs = {false, false};
         for (const auto& p : split_list(s)) {
           if (p == "rgb" || p == "lidar_rgb")
             c.pairs[0] = true;
           else if (p == "event" || p == "lidar_event")
             c.pairs[1] = true;
           else
             throw Error(ErrorCode::kParse, "config: unknown pair '" + p + "'");
         }
       }},
      {"overlay_frames", [](RunConfig& c, const std::string& s) { c.overlay_frames = parse_value<int>(s); }},
      {"schedule", [](RunConfig& c, const std::string& s) { c.schedule = s; }},
      {"seed", [](RunConfig& c, const std::string& s) { c.seed = parse_value<std::uint64_t>(s); }},
      {"jobs", [](RunConfig& c, const std::string& s) { c.jobs = parse_value<int>(s); }},
  };
  const auto it = setters.find(key);
  require(it != setters.end(), ErrorCode::kParse, "config: unknown key '" + key + "'");
  try {
    it->second(cfg, v);
  } catch (const BadValue&) {
    throw Error(ErrorCode::kParse, "config: bad value for '" + key + "': '" + v + "'");
  }
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  for (const auto& [k, v] : io::parse_key_values(text)) apply_config_value(cfg, k, v);
}

int write_dataset(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  require(!ec, ErrorCode::kIo, "cannot create directory " + (out_dir / "frames").string() + ": " + ec.message());

  const auto n = static_cast<std::size_t>(cfg.frames);
  std::vector<std::array<std::string, 4>> lines(n);
  std::vector<Intrinsics> k_rgb(n), k_event(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(seed, {stream::kScene, static_cast<std::uint64_t>(i)});
    const SyntheticFrame f = synth_scene(cfg.scene, rng);
    const std::string stem = "frames/" + frame_stem(i);
    write_with_checksum(out_dir, stem + ".bin", io::encode_point_cloud_bin(f.cloud), lines[i][0]);
    write_with_checksum(out_dir, stem + ".ppm", io::encode_ppm(f.rgb), lines[i][1]);
    std::ostringstream ev;
    ev << "t_us,x,y,polarity\n";
    for (const Event& e : f.events.events) ev << e.t << ',' << e.x << ',' << e.y << ',' << e.polarity << '\n';
    write_with_checksum(out_dir, stem + "_events.csv", ev.str(), lines[i][2]);
    const std::string gt = "lidar_rgb " + format_transform(f.lidar_to_rgb) + "\nlidar_event " +
                           format_transform(f.lidar_to_event) + "\n";
    write_with_checksum(out_dir, stem + "_gt.txt", gt, lines[i][3]);
    k_rgb[i] = f.k_rgb;
    k_event[i] = f.k_event;
  });

  std::ostringstream m;
  m << "# synthetic LiDAR / RGB / event dataset\n";
  m << "format=" << kDatasetFormat << "\n";
  m << "frames=" << n << "\n";
  m << "seed=" << seed << "\n";
  m << "k_rgb=" << format_intrinsics(k_rgb[0]) << "\n";
  m << "k_event=" << format_intrinsics(k_event[0]) << "\n";
  m << "event_resolution=" << k_event[0].width << " " << k_event[0].height << "\n";
  m << "timestamp_us=" << cfg.scene.timestamp_us << "\n";
  m << "event_window_us=" << cfg.scene.event_window_us << "\n";
  char zbuf[64];
  std::snprintf(zbuf, sizeof zbuf, "%.17g", cfg.scene.z_max);
  m << "z_max=" << zbuf << "\n";
  for (const auto& l : lines)
    for (const auto& s : l) m << s;
  io::write_file(out_dir / kManifestName, m.str());
  log_info("wrote " + std::to_string(n) + " frames to " + out_dir.string());
  return cfg.frames;
}

void verify_manifest(const fs::path& dir) {
  const auto kv = io::parse_key_values(io::read_file(dir / kManifestName));
  auto get = [&](const std::string& k) {
    const auto it = kv.find(k);
    require(it != kv.end(), ErrorCode::kParse, "manifest: missing key '" + k + "'");
    return it->second;
  };
  require(get("format") == kDatasetFormat, ErrorCode::kParse, "manifest: unsupported format");
  const auto frames = parse_field<std::size_t>("frames", get("frames"));
  std::set<std::string> listed;
  for (const auto& [k, v] : kv) {
    if (k.rfind("frames/", 0) != 0) continue;
    listed.insert(k);
    const std::string bytes = io::read_file(dir / k);
    require(format_crc(io::crc32(bytes), bytes.size()) == v, ErrorCode::kCheckFailed,
            "checksum mismatch for " + (dir / k).string());
  }
  require(listed.size() == frames * 4, ErrorCode::kCheckFailed, "manifest: file count does not match frame count");
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(dir / "frames")) {
    require(listed.contains("frames/" + e.path().filename().string()), ErrorCode::kCheckFailed,
            "unlisted file in dataset: " + e.path().string());
    ++on_disk;
  }
  require(on_disk == listed.size(), ErrorCode::kCheckFailed, "manifest lists files missing on disk");
}

Dataset read_dataset(const fs::path& dir) {
  verify_manifest(dir);
  const auto kv = io::parse_key_values(io::read_file(dir / kManifestName));
  Dataset ds;
  ds.intrinsics[0] = parse_intrinsics(kv.at("k_rgb"));
  ds.intrinsics[1] = parse_intrinsics(kv.at("k_event"));
  ds.timestamp_us = parse_field<std::int64_t>("timestamp_us", kv.at("timestamp_us"));
  ds.event_window_us = parse_field<std::int64_t>("event_window_us", kv.at("event_window_us"));
  ds.z_max = parse_field<double>("z_max", kv.at("z_max"));
  const auto n = parse_field<std::size_t>("frames", kv.at("frames"));
  ds.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path stem = dir / "frames" / frame_stem(i);
    DatasetFrame& f = ds.frames[i];
    f.cloud = io::load_point_cloud(stem.string() + ".bin");
    f.cloud.frame = frames::kLidar;
    f.rgb = io::decode_ppm(io::read_file(stem.string() + ".ppm"));
    f.events = io::load_events(stem.string() + "_events.csv");
    f.events.width = ds.intrinsics[1].width;
    f.events.height = ds.intrinsics[1].height;
    f.events.validate();
    std::istringstream gt(io::read_file(stem.string() + "_gt.txt"));
    std::string line;
    int found = 0;
    while (std::getline(gt, line)) {
      const auto sp = line.find(' ');
      if (sp == std::string::npos) continue;
      const std::string name = line.substr(0, sp);
      if (name == "lidar_rgb") {
        f.truth[0] = parse_transform(line.substr(sp + 1), frames::kLidar, frames::kRgb);
        ++found;
      } else if (name == "lidar_event") {
        f.truth[1] = parse_transform(line.substr(sp + 1), frames::kLidar, frames::kEvent);
        ++found;
      }
    }
    require(found == 2, ErrorCode::kParse, "ground truth file incomplete: " + stem.string() + "_gt.txt");
  }
  return ds;
}

PreparedFrame prepare_frame(const DatasetFrame& f, const Dataset& ds, const RunConfig& cfg) {
  PreparedFrame p;
  p.cloud = f.cloud;
  p.truth = f.truth;
  p.intrinsics = ds.intrinsics;
  if (cfg.pairs[0]) {
    const Image normalized = standardize_image(f.rgb, channel_stats::kKittiMean, channel_stats::kKittiStd);
    p.camera[0] = camera_embedding(normalized, cfg.features);
  }
  if (cfg.pairs[1]) {
    const Intrinsics& k = ds.intrinsics[1];
    p.camera[1] = camera_embedding(accumulate_events(f.events, ds.timestamp_us, ds.event_window_us, k.width, k.height),
                                   cfg.features);
  }
  return p;
}

PairInput prepare_pair_input(const PreparedFrame& f, Pair pair, const RigidTransform& extrinsic, Rng& rng,
                             const RunConfig& cfg) {
  const int p = static_cast<int>(pair);
  require(f.camera[p].size() > 0, ErrorCode::kInvalidArgument,
          std::string("camera features missing for ") + pair_name(pair));
  PairInput in;
  in.cam_cloud = resample_points(clip_points(f.cloud, extrinsic, cfg.max_depth), cfg.resample_points, rng);
  const FeatureMap lidar = lidar_embedding(in.cam_cloud, f.intrinsics[p], cfg.features);
  in.volume = leaky_relu(correlate(lidar, f.camera[p], cfg.radius));
  return in;
}

fs::path checkpoint_path(const fs::path& model_dir, int stage) {
  return model_dir / ("stage_" + std::to_string(stage) + ".ckpt");
}

StageModels load_stage_models(const fs::path& model_dir, int stage, const RunConfig& cfg) {
  const fs::path path = checkpoint_path(model_dir, stage);
  if (!fs::exists(path))
    throw Error(ErrorCode::kMissingCheckpoint,
                "missing checkpoint for stage " + std::to_string(stage) + ": " + path.string());
  StageModels out;
  for (auto& [name, model] : load_checkpoint(path)) {
    for (int p = 0; p < kPairCount; ++p) {
      if (name != pair_name(static_cast<Pair>(p))) continue;
      require(model.config() == cfg.regressor(), ErrorCode::kInvalidArgument,
              "checkpoint " + path.string() + ": model " + name + " does not match the configured regressor");
      out[p].emplace(std::move(model));
    }
  }
  for (int p = 0; p < kPairCount; ++p)
    if (cfg.pairs[p] && !out[p])
      throw Error(ErrorCode::kMissingCheckpoint, "checkpoint for stage " + std::to_string(stage) + " has no " +
                                                     pair_name(static_cast<Pair>(p)) + " model");
  return out;
}

std::string loss_curve_csv(const TrainingCurve& curve) {
  std::string out = "epoch,l_trans_rgb,l_rot_rgb,l_pcd_rgb,l_pair_rgb,l_trans_ev,l_rot_ev,l_pcd_ev,l_pair_ev,l_total\n";
  char buf[128];
  for (const auto& e : curve.epochs) {
    out += std::to_string(e.epoch);
    for (const auto& p : e.pairs) {
      if (p) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g", p->l_trans, p->l_rot, p->l_pcd, p->l_pair);
        out += buf;
      } else {
        out += ",,,,";
      }
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", e.total);
    out += buf;
  }
  return out;
}

namespace {

std::vector<PreparedFrame> prepare_range(const Dataset& ds, std::size_t begin, std::size_t end, const RunConfig& cfg) {
  std::vector<PreparedFrame> out(end - begin);
  parallel_for(out.size(), cfg.jobs, [&](std::size_t i) { out[i] = prepare_frame(ds.frames[begin + i], ds, cfg); });
  return out;
}

}  // namespace

TrainSummary run_training(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();
  const StageSchedule schedule = load_schedule(cfg.schedule);
  const Dataset ds = read_dataset(data_dir);
  const auto n_train = static_cast<std::size_t>(cfg.train_frames);
  require(n_train >= 1 && n_train <= ds.frames.size(), ErrorCode::kInvalidArgument,
          "train_frames must be in [1, dataset frames]");
  const std::vector<PreparedFrame> frames = prepare_range(ds, 0, n_train, cfg);
  const fs::path model_dir = out_dir / "models";
  std::error_code ec;
  fs::create_directories(model_dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create directory " + model_dir.string() + ": " + ec.message());

  TrainSummary summary;
  summary.stages = static_cast<int>(schedule.size());
  StageModels current;
  for (int stage = 1; stage <= summary.stages; ++stage) {
    const fs::path ckpt = checkpoint_path(model_dir, stage);
    const fs::path loss_csv = out_dir / ("loss_stage_" + std::to_string(stage) + ".csv");
    if (fs::exists(ckpt) && fs::exists(loss_csv)) {
      current = load_stage_models(model_dir, stage, cfg);
      log_info("stage " + std::to_string(stage) + ": restored from " + ckpt.string());
      continue;
    }
    if (stage == 1) {
      for (int p = 0; p < kPairCount; ++p) {
        if (!cfg.pairs[p]) continue;
        current[p].emplace(cfg.regressor());
        Rng rng = Rng::substream(seed, {stream::kInit, static_cast<std::uint64_t>(p)});
        current[p]->initialize(rng);
      }
    }
    const PerturbRange range = schedule.stages[static_cast<std::size_t>(stage - 1)];
    const SampleProvider provider = [&](std::span<const std::size_t> ids, int epoch) {
      std::vector<PairSamples> per(ids.size());
      parallel_for(ids.size(), cfg.jobs, [&](std::size_t j) {
        const std::size_t fi = ids[j];
        const PreparedFrame& f = frames[fi];
        const DualPerturbation dp =
            dual_perturb(f.truth[0], f.truth[1], range, seed,
                         {static_cast<std::uint64_t>(stage), static_cast<std::uint64_t>(epoch), fi});
        for (int p = 0; p < kPairCount; ++p) {
          if (!cfg.pairs[p]) continue;
          const Pair pair = static_cast<Pair>(p);
          Rng rng = Rng::substream(seed, {stream::kResample, static_cast<std::uint64_t>(stage),
                                          static_cast<std::uint64_t>(epoch), fi, static_cast<std::uint64_t>(p)});
          const RigidTransform& init = pair == Pair::kRgb ? dp.rgb_init : dp.event_init;
          const RigidTransform& delta = pair == Pair::kRgb ? dp.rgb_delta : dp.event_delta;
          PairInput in = prepare_pair_input(f, pair, init, rng, cfg);
          per[j][p].push_back({std::move(in.volume), inverse(delta), std::move(in.cam_cloud)});
        }
      });
      PairSamples out;
      for (auto& s : per)
        for (int p = 0; p < kPairCount; ++p)
          for (auto& x : s[p]) out[p].push_back(std::move(x));
      return out;
    };
    TrainingConfig tc = cfg.training;
    tc.epochs = cfg.epochs_for_stage(stage);
    tc.seed = seed;
    PairModels models{};
    for (int p = 0; p < kPairCount; ++p) models[p] = current[p] ? &*current[p] : nullptr;
    log_info("stage " + std::to_string(stage) + ": training " + std::to_string(tc.epochs) + " epochs on " +
             std::to_string(n_train) + " frames");
    TrainingCurve curve;
    try {
      curve = train_stage(models, n_train, provider, tc, stage, cfg.jobs);
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + std::to_string(stage) + ": " + e.what());
    }
    std::vector<NamedModel> named;
    for (int p = 0; p < kPairCount; ++p)
      if (current[p]) named.push_back({pair_name(static_cast<Pair>(p)), &*current[p]});
    save_checkpoint(ckpt, named);
    io::write_file(loss_csv, loss_curve_csv(curve));
    summary.warnings.insert(summary.warnings.end(), curve.warnings.begin(), curve.warnings.end());
    ++summary.trained;
  }
  return summary;
}

StageReport run_evaluation(const RunConfig& cfg, const fs::path& data_dir, const fs::path& model_dir,
                           const fs::path& out_dir) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();
  const StageSchedule schedule = load_schedule(cfg.schedule);
  const int stages = static_cast<int>(schedule.size());
  std::vector<StageModels> models;
  for (int k = 1; k <= stages; ++k) models.push_back(load_stage_models(model_dir, k, cfg));

  const Dataset ds = read_dataset(data_dir);
  const auto begin = static_cast<std::size_t>(cfg.train_frames);
  require(begin < ds.frames.size(), ErrorCode::kInvalidArgument, "no held-out frames to evaluate");
  const std::size_t n = ds.frames.size() - begin;

  std::vector<std::vector<PairTrace>> traces(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::size_t fi = begin + i;
    const PreparedFrame f = prepare_frame(ds.frames[fi], ds, cfg);
    PairTruth truth;
    for (int p = 0; p < kPairCount; ++p)
      if (cfg.pairs[p]) truth[p] = f.truth[p];
    const StagePredictor predict = [&](Pair pair, int stage, const RigidTransform& current) {
      const int p = static_cast<int>(pair);
      Rng rng = Rng::substream(seed, {stream::kResample, stream::kEval, static_cast<std::uint64_t>(stage), fi,
                                      static_cast<std::uint64_t>(p)});
      const PairInput in = prepare_pair_input(f, pair, current, rng, cfg);
      return to_transform(models[static_cast<std::size_t>(stage - 1)][p]->forward(in.volume), camera_frame(pair));
    };
    traces[i] = run_pipeline(truth, schedule, stages, predict, seed, fi);
  });

  const StageReport report = build_report(traces);
  std::error_code ec;
  fs::create_directories(out_dir / "overlays", ec);
  require(!ec, ErrorCode::kIo, "cannot create directory " + (out_dir / "overlays").string() + ": " + ec.message());
  io::write_file(out_dir / "stage_report.csv", report.to_csv());

  const std::size_t n_overlay = std::min(n, static_cast<std::size_t>(cfg.overlay_frames));
  parallel_for(n_overlay, cfg.jobs, [&](std::size_t i) {
    const std::size_t fi = begin + i;
    const DatasetFrame& f = ds.frames[fi];
    for (const PairTrace& tr : traces[i]) {
      const int p = static_cast<int>(tr.pair);
      const Image bg = tr.pair == Pair::kRgb ? f.rgb : event_background(f.events, ds);
      const ScaledIntrinsics k =
          scale_intrinsics(ds.intrinsics[p], cfg.features.input_width, cfg.features.input_height);
      const std::string stem = frame_stem(fi) + "_" + pair_name(tr.pair);
      for (const auto& [tag, stage] : {std::pair<const char*, int>{"before", 0}, {"after", stages}}) {
        const PointCloud cam = clip_points(f.cloud, tr.extrinsic(stage), cfg.max_depth);
        io::write_file(out_dir / "overlays" / (stem + "_" + tag + ".ppm"),
                       io::encode_ppm(render_overlay(bg, cam, k, cfg.max_depth)));
      }
    }
  });
  return report;
}

}  // namespace trical

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

#include "trical/regressor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include "trical/io.hpp"
#include "trical/parallel.hpp"

namespace trical {

namespace {

double leaky(double v, double slope) { return v > 0 ? v : slope * v; }
double leaky_deriv(double activated, double slope) { return activated > 0 ? 1.0 : slope; }

std::string conv_name(int i, const char* suffix) { return "conv" + std::to_string(i) + "." + suffix; }

}  // namespace

void RegressorConfig::validate() const {
  require(cost_channels >= 1 && height >= 1 && width >= 1, ErrorCode::kInvalidArgument,
          "regressor: cost volume dimensions must be positive");
  require(layers >= 1 && growth >= 1, ErrorCode::kInvalidArgument, "regressor: layers and growth must be >= 1");
  require(kernel >= 1 && kernel % 2 == 1, ErrorCode::kInvalidArgument, "regressor: kernel must be odd");
  require(fc_width >= 1 && head_width >= 1, ErrorCode::kInvalidArgument, "regressor: widths must be >= 1");
  require(slope > 0 && slope < 1, ErrorCode::kInvalidArgument, "regressor: slope must be in (0, 1)");
}

ParamLayout::ParamLayout(const RegressorConfig& cfg) {
  cfg.validate();
  auto add = [&](std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), rows, cols, total_});
    total_ += static_cast<std::size_t>(rows) * cols;
  };
  const int kk = cfg.kernel * cfg.kernel;
  for (int i = 0; i < cfg.layers; ++i) {
    add(conv_name(i, "w"), cfg.growth, (cfg.cost_channels + i * cfg.growth) * kk);
    add(conv_name(i, "b"), cfg.growth, 1);
  }
  add("fc.b", cfg.fc_width, 1);
  add("trans1.w", cfg.head_width, cfg.fc_width);
  add("trans1.b", cfg.head_width, 1);
  add("trans2.w", 3, cfg.head_width);
  add("trans2.b", 3, 1);
  add("rot1.w", cfg.head_width, cfg.fc_width);
  add("rot1.b", cfg.head_width, 1);
  add("rot2.w", 4, cfg.head_width);
  add("rot2.b", 4, 1);
  add("fc.w", cfg.fc_width, cfg.latent_size());
}

const TensorInfo& ParamLayout::get(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return t;
  throw Error(ErrorCode::kInvalidArgument, "unknown tensor: " + name);
}

Regressor::Regressor(const RegressorConfig& cfg) : cfg_(cfg), layout_(cfg), params_(layout_.total(), 0.0) {
  for (int i = 0; i < cfg_.layers; ++i) {
    conv_w_.push_back(layout_.get(conv_name(i, "w")).offset);
    conv_b_.push_back(layout_.get(conv_name(i, "b")).offset);
  }
}

ConstMatrixMap Regressor::weight(const std::string& name) const {
  const TensorInfo& t = layout_.get(name);
  return ConstMatrixMap(params_.data() + t.offset, t.rows, t.cols);
}

ConstVectorMap Regressor::bias(const std::string& name) const {
  const TensorInfo& t = layout_.get(name);
  return ConstVectorMap(params_.data() + t.offset, t.rows);
}

void Regressor::initialize(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  const double gain = 1.0 + cfg_.slope * cfg_.slope;
  for (const auto& t : layout_.tensors()) {
    if (t.cols == 1) continue;  // biases
    const bool output = t.name == "trans2.w" || t.name == "rot2.w";
    const double bound = output ? 0.1 / std::sqrt(static_cast<double>(t.cols))
                                : std::sqrt(6.0 / (gain * static_cast<double>(t.cols)));
    for (std::size_t i = 0; i < t.size(); ++i) params_[t.offset + i] = rng.uniform(-bound, bound);
  }
  params_[layout_.get("rot2.b").offset] = 1.0;
}

// Row (c * k + ky) * k + kx of `cols` holds channel c shifted by (ky - pad, kx - pad), zero outside.
void Regressor::im2col_rows(const RowMatrix& running, int c0, int c1, RowMatrix& cols) const {
  const int k = cfg_.kernel, pad = k / 2, h = cfg_.height, w = cfg_.width;
  for (int c = c0; c < c1; ++c) {
    const double* src = running.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* dst = cols.row((c * k + ky) * k + kx).data();
        std::fill(dst, dst + h * w, 0.0);
        const int oy = ky - pad, ox = kx - pad;
        const int y0 = std::max(0, -oy), y1 = std::min(h, h - oy);
        const int x0 = std::max(0, -ox), x1 = std::min(w, w - ox);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) dst[y * w + x] = src[(y + oy) * w + x + ox];
      }
    }
  }
}

// Adjoint of im2col_rows for channels [c0, c1); `d_cols` row 0 corresponds to `first_channel`.
void Regressor::col2im_add(const RowMatrix& d_cols, int first_channel, int c0, int c1, RowMatrix& d_running) const {
  const int k = cfg_.kernel, pad = k / 2, h = cfg_.height, w = cfg_.width;
  for (int c = c0; c < c1; ++c) {
    double* dst = d_running.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* src = d_cols.row(((c - first_channel) * k + ky) * k + kx).data();
        const int oy = ky - pad, ox = kx - pad;
        const int y0 = std::max(0, -oy), y1 = std::min(h, h - oy);
        const int x0 = std::max(0, -ox), x1 = std::min(w, w - ox);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) dst[(y + oy) * w + x + ox] += src[y * w + x];
      }
    }
  }
}

void Regressor::context(const CostVolume& cv, ForwardCache& c) const {
  require(cv.volume.channels() == cfg_.cost_channels && cv.volume.height() == cfg_.height &&
              cv.volume.width() == cfg_.width,
          ErrorCode::kInvalidArgument, "context_forward: cost volume shape does not match parameters");
  const int pixels = cfg_.height * cfg_.width;
  const int kk = cfg_.kernel * cfg_.kernel;
  const int last_in = cfg_.cost_channels + (cfg_.layers - 1) * cfg_.growth;
  c.running.resize(cfg_.context_channels(), pixels);
  c.running.topRows(cfg_.cost_channels) = ConstMatrixMap(cv.volume.data().data(), cfg_.cost_channels, pixels);
  c.cols.resize(static_cast<Eigen::Index>(last_in) * kk, pixels);
  im2col_rows(c.running, 0, cfg_.cost_channels, c.cols);
  for (int i = 0; i < cfg_.layers; ++i) {
    const int cin = cfg_.cost_channels + i * cfg_.growth;
    const ConstMatrixMap w(params_.data() + conv_w_[i], cfg_.growth, cin * kk);
    const ConstVectorMap b(params_.data() + conv_b_[i], cfg_.growth);
    auto out = c.running.middleRows(cin, cfg_.growth);
    out.noalias() = w * c.cols.topRows(static_cast<Eigen::Index>(cin) * kk);
    out.colwise() += b;
    out = out.unaryExpr([s = cfg_.slope](double v) { return leaky(v, s); });
    if (i + 1 < cfg_.layers) im2col_rows(c.running, cin, cin + cfg_.growth, c.cols);
  }
}

void Regressor::heads(ForwardCache& c, const Eigen::VectorXd& shared_pre) const {
  const double s = cfg_.slope;
  auto act = [s](double v) { return leaky(v, s); };
  c.shared = (shared_pre + bias("fc.b")).unaryExpr(act);
  c.trans_hidden = (weight("trans1.w") * c.shared + bias("trans1.b")).unaryExpr(act);
  c.rot_hidden = (weight("rot1.w") * c.shared + bias("rot1.b")).unaryExpr(act);
  c.translation = weight("trans2.w") * c.trans_hidden + bias("trans2.b");
  c.rot_raw = weight("rot2.w") * c.rot_hidden + bias("rot2.b");
  const double n = c.rot_raw.norm();
  require(std::isfinite(n) && c.translation.allFinite(), ErrorCode::kNumeric, "non-finite head output");
  require(n >= 1e-8, ErrorCode::kDegenerate, "degenerate head output");
  const Eigen::Vector4d q = c.rot_raw / n;
  c.rotation = {q[0], q[1], q[2], q[3]};
}

std::vector<ForwardCache> Regressor::forward_batch(std::span<const CostVolume* const> volumes, int jobs) const {
  std::vector<ForwardCache> caches(volumes.size());
  parallel_for(volumes.size(), jobs, [&](std::size_t i) { context(*volumes[i], caches[i]); });
  const auto n = static_cast<Eigen::Index>(volumes.size());
  RowMatrix latents(n, cfg_.latent_size());
  for (Eigen::Index i = 0; i < n; ++i) latents.row(i) = caches[i].latent().transpose();
  const RowMatrix pre = latents * weight("fc.w").transpose();
  for (Eigen::Index i = 0; i < n; ++i) heads(caches[i], pre.row(i).transpose());
  return caches;
}

ForwardCache Regressor::forward(const CostVolume& cv) const {
  const CostVolume* one[] = {&cv};
  return std::move(forward_batch(one).front());
}

Eigen::VectorXd Regressor::context_forward(const CostVolume& cv) const {
  ForwardCache c;
  context(cv, c);
  return c.latent();
}

ForwardCache Regressor::predict_from_latent(const Eigen::VectorXd& latent) const {
  require(latent.size() == cfg_.latent_size(), ErrorCode::kInvalidArgument,
          "predict_pose: latent length does not match parameters");
  ForwardCache c;
  c.running = ConstMatrixMap(latent.data(), cfg_.context_channels(), cfg_.height * cfg_.width);
  heads(c, weight("fc.w") * latent);
  return c;
}

Eigen::VectorXd Regressor::backward_heads(const ForwardCache& c, const PoseGrad& g,
                                          std::span<double> prefix_grad) const {
  require(prefix_grad.size() == layout_.prefix(), ErrorCode::kInternal, "backward: prefix size mismatch");
  const double s = cfg_.slope;
  auto grad_mat = [&](const std::string& name) {
    const TensorInfo& t = layout_.get(name);
    return MatrixMap(prefix_grad.data() + t.offset, t.rows, t.cols);
  };
  auto grad_vec = [&](const std::string& name) {
    const TensorInfo& t = layout_.get(name);
    return VectorMap(prefix_grad.data() + t.offset, t.rows);
  };
  auto through_act = [s](const Eigen::VectorXd& d, const Eigen::VectorXd& activated) {
    Eigen::VectorXd out(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) out[i] = d[i] * leaky_deriv(activated[i], s);
    return out;
  };

  // Rotation normalization: d q_hat / d raw = (I - q_hat q_hat^T) / |raw|.
  const Eigen::Vector4d qh(c.rotation.w, c.rotation.x, c.rotation.y, c.rotation.z);
  const Eigen::Vector4d d_raw = (g.d_q - qh * qh.dot(g.d_q)) / c.rot_raw.norm();

  grad_mat("rot2.w") += d_raw * c.rot_hidden.transpose();
  grad_vec("rot2.b") += d_raw;
  const Eigen::VectorXd d_rot_pre = through_act(weight("rot2.w").transpose() * d_raw, c.rot_hidden);
  grad_mat("rot1.w") += d_rot_pre * c.shared.transpose();
  grad_vec("rot1.b") += d_rot_pre;

  grad_mat("trans2.w") += g.d_t * c.trans_hidden.transpose();
  grad_vec("trans2.b") += g.d_t;
  const Eigen::VectorXd d_trans_pre = through_act(weight("trans2.w").transpose() * g.d_t, c.trans_hidden);
  grad_mat("trans1.w") += d_trans_pre * c.shared.transpose();
  grad_vec("trans1.b") += d_trans_pre;

  const Eigen::VectorXd d_shared =
      weight("rot1.w").transpose() * d_rot_pre + weight("trans1.w").transpose() * d_trans_pre;
  Eigen::VectorXd d_fc_pre = through_act(d_shared, c.shared);
  grad_vec("fc.b") += d_fc_pre;
  return d_fc_pre;
}

void Regressor::backward_context(const ForwardCache& c, const double* d_latent, std::span<double> prefix_grad) const {
  require(prefix_grad.size() == layout_.prefix(), ErrorCode::kInternal, "backward: prefix size mismatch");
  const double s = cfg_.slope;
  const int pixels = cfg_.height * cfg_.width;
  const int kk = cfg_.kernel * cfg_.kernel;
  const int m = cfg_.cost_channels;
  RowMatrix d_running = ConstMatrixMap(d_latent, cfg_.context_channels(), pixels);
  for (int i = cfg_.layers - 1; i >= 0; --i) {
    const int cin = m + i * cfg_.growth;
    RowMatrix d_z = d_running.middleRows(cin, cfg_.growth);
    const auto y = c.running.middleRows(cin, cfg_.growth);
    for (Eigen::Index r = 0; r < d_z.rows(); ++r)
      for (Eigen::Index p = 0; p < d_z.cols(); ++p) d_z(r, p) *= leaky_deriv(y(r, p), s);
    const auto cols = c.cols.topRows(static_cast<Eigen::Index>(cin) * kk);
    MatrixMap(prefix_grad.data() + conv_w_[i], cfg_.growth, cin * kk).noalias() += d_z * cols.transpose();
    VectorMap(prefix_grad.data() + conv_b_[i], cfg_.growth) += d_z.rowwise().sum();
    if (cin > m) {
      const ConstMatrixMap w(params_.data() + conv_w_[i], cfg_.growth, cin * kk);
      const RowMatrix d_cols = w.rightCols((cin - m) * kk).transpose() * d_z;
      col2im_add(d_cols, m, m, cin, d_running);
    }
  }
}

RigidTransform to_transform(const ForwardCache& c, const FrameId& frame) {
  return RigidTransform{c.rotation, c.translation, frame, frame};
}

namespace {

const FrameId kCorrectionFrame = "camera";

struct BatchForward {
  std::vector<ForwardCache> caches;
  std::vector<RigidTransform> preds, targets;
  std::vector<PointCloud> clouds;
};

BatchForward run_forward(const Regressor& model, std::span<const TrainingSample> batch, int jobs) {
  require(!batch.empty(), ErrorCode::kInvalidArgument, "backward: empty batch");
  std::vector<const CostVolume*> volumes;
  for (const auto& s : batch) volumes.push_back(&s.volume);
  BatchForward f;
  f.caches = model.forward_batch(volumes, jobs);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    f.preds.push_back(to_transform(f.caches[i], kCorrectionFrame));
    RigidTransform t = batch[i].target;
    t.source = t.target = kCorrectionFrame;
    f.targets.push_back(t);
    f.clouds.push_back(batch[i].cloud);
  }
  return f;
}

}  // namespace

PairLossBreakdown batch_loss(const Regressor& model, std::span<const TrainingSample> batch,
                             const LossWeights& weights) {
  const BatchForward f = run_forward(model, batch, 1);
  return evaluate_pair_loss(f.preds, f.targets, f.clouds, weights).breakdown;
}

BatchResult batch_gradient(const Regressor& model, std::span<const TrainingSample> batch,
                           const LossWeights& weights, int jobs) {
  const BatchForward f = run_forward(model, batch, jobs);
  const PairLossResult loss = evaluate_pair_loss(f.preds, f.targets, f.clouds, weights);

  const std::size_t prefix = model.layout().prefix();
  const auto& cfg = model.config();
  const auto n = static_cast<Eigen::Index>(batch.size());
  std::vector<std::vector<double>> prefix_grads(batch.size(), std::vector<double>(prefix, 0.0));
  RowMatrix d_fc(n, cfg.fc_width);
  for (Eigen::Index i = 0; i < n; ++i)
    d_fc.row(i) = model.backward_heads(f.caches[i], loss.grads[i], prefix_grads[i]).transpose();
  const RowMatrix d_latent = d_fc * model.weight("fc.w");
  parallel_for(batch.size(), jobs, [&](std::size_t i) {
    model.backward_context(f.caches[i], d_latent.row(static_cast<Eigen::Index>(i)).data(), prefix_grads[i]);
  });

  BatchResult r;
  r.loss = loss.breakdown;
  r.predictions = f.preds;
  r.gradient.assign(model.layout().total(), 0.0);
  for (const auto& pg : prefix_grads)
    for (std::size_t j = 0; j < prefix; ++j) r.gradient[j] += pg[j];
  RowMatrix latents(n, cfg.latent_size());
  for (Eigen::Index i = 0; i < n; ++i) latents.row(i) = f.caches[i].latent().transpose();
  MatrixMap(r.gradient.data() + prefix, cfg.fc_width, cfg.latent_size()).noalias() = d_fc.transpose() * latents;
  return r;
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  require(params.size() == grad.size() && params.size() == m_.size(), ErrorCode::kInternal,
          "optimizer: size mismatch");
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1 - b2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

void TrainingConfig::validate() const {
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "training: batch size must be >= 1");
  require(learning_rate >= 0, ErrorCode::kInvalidArgument, "training: learning rate must be >= 0");
  require(epochs >= 0, ErrorCode::kInvalidArgument, "training: epochs must be >= 0");
  weights.validate();
}

double learning_rate_at(const TrainingConfig& cfg, int epoch) {
  double lr = cfg.learning_rate;
  for (int m : cfg.milestones)
    if (epoch >= m) lr *= 0.5;
  return lr;
}

TrainingCurve train_stage(const PairModels& models, std::size_t frame_count, const SampleProvider& provider,
                          const TrainingConfig& cfg, int stage, int jobs) {
  cfg.validate();
  require(frame_count >= 1, ErrorCode::kInvalidArgument, "training: no frames");
  require(std::any_of(models.begin(), models.end(), [](auto* m) { return m != nullptr; }),
          ErrorCode::kInvalidArgument, "training: no active pair");
  std::vector<std::optional<Optimizer>> opts(kPairCount);
  for (int p = 0; p < kPairCount; ++p)
    if (models[p]) opts[p].emplace(cfg.optimizer, models[p]->params().size());

  TrainingCurve curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(frame_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = Rng::substream(cfg.seed, {stream::kShuffle, static_cast<std::uint64_t>(stage),
                                            static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = frame_count; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    const double lr = learning_rate_at(cfg, epoch);

    EpochLoss el;
    el.epoch = epoch;
    std::array<PairLossBreakdown, kPairCount> sums{};
    std::size_t seen = 0;
    for (std::size_t start = 0; start < frame_count; start += cfg.batch_size) {
      const std::size_t end = std::min(frame_count, start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> ids(order.data() + start, end - start);
      const PairSamples samples = provider(ids, epoch);
      const double weight = static_cast<double>(ids.size());
      for (int p = 0; p < kPairCount; ++p) {
        if (!models[p]) continue;
        BatchResult br;
        try {
          br = batch_gradient(*models[p], samples[p], cfg.weights, jobs);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNumeric) throw;
          br.loss.l_pair = std::numeric_limits<double>::quiet_NaN();
        }
        require(std::isfinite(br.loss.l_pair), ErrorCode::kNumeric,
                "non-finite loss at epoch " + std::to_string(epoch));
        opts[p]->step(models[p]->params(), br.gradient, lr);
        sums[p].l_trans += br.loss.l_trans * weight;
        sums[p].l_rot += br.loss.l_rot * weight;
        sums[p].l_pcd += br.loss.l_pcd * weight;
        sums[p].l_pair += br.loss.l_pair * weight;
      }
      seen += ids.size();
    }
    for (int p = 0; p < kPairCount; ++p) {
      if (!models[p]) continue;
      PairLossBreakdown b = sums[p];
      const double inv = 1.0 / static_cast<double>(seen);
      b.l_trans *= inv;
      b.l_rot *= inv;
      b.l_pcd *= inv;
      b.l_pair *= inv;
      el.pairs[p] = b;
    }
    el.total = loss_total(el.pairs[0], el.pairs[1]);
    log_info("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) + " loss " +
             std::to_string(el.total));
    curve.epochs.push_back(el);
    if (epoch >= 10 && el.total > curve.epochs[epoch - 10].total) {
      std::string w = "stage " + std::to_string(stage) + ": epoch " + std::to_string(epoch) +
                      " mean loss exceeds epoch " + std::to_string(epoch - 10);
      log_info("warning: " + w);
      curve.warnings.push_back(std::move(w));
    }
  }
  return curve;
}

namespace {

constexpr const char* kCheckpointMagic = "trical-checkpoint 1";

void append_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedModel>& models) {
  std::ostringstream head;
  head << kCheckpointMagic << "\n";
  head << "models " << models.size() << "\n";
  std::string blob;
  for (const auto& nm : models) {
    const RegressorConfig& c = nm.model->config();
    head << "model " << nm.name << "\n";
    char slope[64];
    std::snprintf(slope, sizeof slope, "%.17g", c.slope);
    head << "config " << c.cost_channels << " " << c.height << " " << c.width << " " << c.layers << " "
         << c.growth << " " << c.kernel << " " << c.fc_width << " " << c.head_width << " " << slope << "\n";
    for (const auto& t : nm.model->layout().tensors()) head << "tensor " << t.name << " " << t.rows << " " << t.cols << "\n";
    for (double v : nm.model->params()) append_f64(blob, v);
  }
  head << "end\n";
  io::write_file(path, head.str() + blob);
}

std::vector<std::pair<std::string, Regressor>> load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  const auto fail = [&](const std::string& why) {
    return Error(ErrorCode::kParse, "checkpoint " + path.string() + ": " + why);
  };
  const std::size_t end = bytes.find("\nend\n");
  if (bytes.rfind(kCheckpointMagic, 0) != 0 || end == std::string::npos) throw fail("missing manifest");
  std::istringstream head(bytes.substr(0, end));
  std::string line, word;
  std::getline(head, line);
  std::size_t count = 0;
  if (!(head >> word >> count) || word != "models") throw fail("missing model count");
  std::vector<std::pair<std::string, Regressor>> out;
  std::size_t offset = end + 5;
  for (std::size_t m = 0; m < count; ++m) {
    std::string name;
    RegressorConfig c;
    if (!(head >> word >> name) || word != "model") throw fail("expected model entry");
    if (!(head >> word >> c.cost_channels >> c.height >> c.width >> c.layers >> c.growth >> c.kernel >> c.fc_width >>
          c.head_width >> c.slope) ||
        word != "config")
      throw fail("bad config for model " + name);
    Regressor r(c);
    for (const auto& t : r.layout().tensors()) {
      std::string tn;
      int rows = 0, cols = 0;
      if (!(head >> word >> tn >> rows >> cols) || word != "tensor") throw fail("expected tensor entry");
      if (tn != t.name || rows != t.rows || cols != t.cols) throw fail("tensor " + tn + " does not match layout");
    }
    const std::size_t need = r.params().size() * 8;
    if (bytes.size() < offset + need) throw fail("truncated parameter data");
    for (std::size_t i = 0; i < r.params().size(); ++i) r.params()[i] = read_f64(bytes.data() + offset + 8 * i);
    offset += need;
    out.emplace_back(name, std::move(r));
  }
  if (offset != bytes.size()) throw fail("trailing bytes after parameter data");
  return out;
}

double gradient_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

GradCheckResult gradient_check(std::uint64_t seed, const LossWeights& weights, double h) {
  RegressorConfig cfg;
  cfg.cost_channels = 9;
  cfg.height = 3;
  cfg.width = 4;
  cfg.growth = 2;
  cfg.fc_width = 6;
  cfg.head_width = 5;
  Regressor model(cfg);
  Rng rng = Rng::substream(seed, {stream::kTest, 1});
  model.initialize(rng);
  for (double& p : model.params()) p += rng.uniform(-0.2, 0.2);

  std::vector<TrainingSample> batch(3);
  for (auto& s : batch) {
    s.volume = CostVolume{Grid(cfg.cost_channels, cfg.height, cfg.width), 1};
    for (double& v : s.volume.volume.data()) v = leaky(rng.normal(), kLeakySlope);
    const Quaternion q = euler_to_quat(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30));
    s.target = RigidTransform{q, Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)), "camera", "camera"};
    s.cloud.frame = "camera";
    for (int i = 0; i < 8; ++i)
      s.cloud.points.emplace_back(rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(2, 10));
  }

  const BatchResult analytic = batch_gradient(model, batch, weights);
  GradCheckResult res;
  for (const auto& t : model.layout().tensors()) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t k = t.offset + i;
      const double orig = model.params()[k];
      model.params()[k] = orig + h;
      const double up = batch_loss(model, batch, weights).l_pair;
      model.params()[k] = orig - h;
      const double down = batch_loss(model, batch, weights).l_pair;
      model.params()[k] = orig;
      const double err = gradient_rel_error(analytic.gradient[k], (up - down) / (2 * h));
      if (err > res.max_rel_error || res.worst_tensor.empty()) {
        res.max_rel_error = std::max(res.max_rel_error, err);
        res.worst_tensor = t.name;
      }
      ++res.checked;
    }
  }
  return res;
}

}  // namespace trical

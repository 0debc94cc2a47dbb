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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trical/costvolume.hpp"
#include "trical/geometry.hpp"
#include "trical/losses.hpp"
#include "trical/perturb.hpp"
#include "trical/random.hpp"

namespace trical {

struct RegressorConfig {
  int cost_channels = 81;  // M = (2d+1)^2
  int height = 16;
  int width = 32;
  int layers = 5;
  int growth = 8;
  int kernel = 3;
  int fc_width = 128;
  int head_width = 64;
  double slope = kLeakySlope;

  int context_channels() const { return cost_channels + layers * growth; }
  int latent_size() const { return context_channels() * height * width; }
  void validate() const;
  bool operator==(const RegressorConfig&) const = default;
};

/// Named slice of the flat parameter vector. Weights are row-major (rows = outputs).
struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

/// Parameter layout. The shared fully connected weight is stored last so that all
/// other parameters form a small contiguous prefix.
class ParamLayout {
 public:
  explicit ParamLayout(const RegressorConfig& cfg);

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& get(const std::string& name) const;
  std::size_t total() const { return total_; }
  /// Number of leading parameters excluding the shared FC weight.
  std::size_t prefix() const { return tensors_.back().offset; }

 private:
  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

struct ForwardCache {
  RowMatrix running;  // context_channels x (H*W): cost volume rows then each layer's activations
  RowMatrix cols;     // im2col rows of every channel that feeds a convolution
  Eigen::VectorXd shared;  // after LeakyReLU
  Eigen::VectorXd trans_hidden;
  Eigen::VectorXd rot_hidden;
  Eigen::Vector4d rot_raw;
  Vec3 translation;
  Quaternion rotation;

  /// Flattened running tensor (channel-major), the input of the shared layer.
  Eigen::Map<const Eigen::VectorXd> latent() const { return {running.data(), running.size()}; }
};

/// Context module + split prediction heads for one modality pair.
class Regressor {
 public:
  explicit Regressor(const RegressorConfig& cfg);

  const RegressorConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Kaiming-uniform weights, zero biases, rotation output bias (1, 0, 0, 0).
  void initialize(Rng& rng);

  /// Five convolutions with dense concatenation; returns the flattened running tensor.
  Eigen::VectorXd context_forward(const CostVolume& cv) const;
  /// Full forward pass; throws "degenerate head output" on a vanishing rotation output.
  ForwardCache forward(const CostVolume& cv) const;
  /// Forward over a batch. The shared layer runs as one matrix product.
  std::vector<ForwardCache> forward_batch(std::span<const CostVolume* const> volumes, int jobs = 1) const;
  /// Heads only, from a latent vector.
  ForwardCache predict_from_latent(const Eigen::VectorXd& latent) const;

  /// Head gradients for one sample given d/dt and d/dq at the normalized outputs. Adds into
  /// `prefix_grad` (size layout().prefix()) and returns d loss / d (shared pre-activation).
  Eigen::VectorXd backward_heads(const ForwardCache& cache, const PoseGrad& g, std::span<double> prefix_grad) const;
  /// Convolution gradients for one sample from d loss / d latent. Adds into `prefix_grad`.
  void backward_context(const ForwardCache& cache, const double* d_latent, std::span<double> prefix_grad) const;

  ConstMatrixMap weight(const std::string& name) const;
  ConstVectorMap bias(const std::string& name) const;

 private:
  void context(const CostVolume& cv, ForwardCache& c) const;
  void im2col_rows(const RowMatrix& running, int c0, int c1, RowMatrix& cols) const;
  void col2im_add(const RowMatrix& d_cols, int first_channel, int c0, int c1, RowMatrix& d_running) const;
  void heads(ForwardCache& c, const Eigen::VectorXd& shared_pre) const;

  RegressorConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
  std::vector<std::size_t> conv_w_, conv_b_;
};

/// One supervised example for a pair: activated cost volume, target correction, and the
/// (miscalibrated camera-frame) cloud used by the point distance loss.
struct TrainingSample {
  CostVolume volume;
  RigidTransform target;
  PointCloud cloud;
};

struct BatchResult {
  PairLossBreakdown loss;
  std::vector<double> gradient;  // same layout as params
  std::vector<RigidTransform> predictions;
};

/// Forward + analytic backward over a batch. Per-sample work runs on up to `jobs`
/// threads; reduction order is fixed so results do not depend on `jobs`.
BatchResult batch_gradient(const Regressor& model, std::span<const TrainingSample> batch,
                           const LossWeights& weights, int jobs = 1);

/// Loss only (used by finite differences).
PairLossBreakdown batch_loss(const Regressor& model, std::span<const TrainingSample> batch,
                             const LossWeights& weights);

RigidTransform to_transform(const ForwardCache& c, const FrameId& frame);

enum class OptimizerKind { kSgd, kAdam };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t size) : kind_(kind), m_(size, 0.0), v_(size, 0.0) {}
  void step(std::vector<double>& params, const std::vector<double>& grad, double lr);

 private:
  OptimizerKind kind_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

struct TrainingConfig {
  int batch_size = 8;
  double learning_rate = 1e-3;
  std::vector<int> milestones;  // epochs at which the rate halves
  int epochs = 30;
  LossWeights weights;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgd;

  void validate() const;
};

struct EpochLoss {
  int epoch = 0;
  std::array<std::optional<PairLossBreakdown>, kPairCount> pairs;
  double total = 0.0;
};

struct TrainingCurve {
  std::vector<EpochLoss> epochs;
  std::vector<std::string> warnings;
};

using PairModels = std::array<Regressor*, kPairCount>;
using PairSamples = std::array<std::vector<TrainingSample>, kPairCount>;
/// Builds the samples of every active pair for the given frame indices at an epoch.
using SampleProvider = std::function<PairSamples(std::span<const std::size_t> frames, int epoch)>;

/// Mini-batch descent over `frame_count` frames, shuffled per epoch from (seed, stage).
/// Inactive pairs have a null model. Throws on a non-finite loss, naming the epoch.
TrainingCurve train_stage(const PairModels& models, std::size_t frame_count, const SampleProvider& provider,
                          const TrainingConfig& cfg, int stage, int jobs = 1);

/// Learning rate in effect at `epoch`.
double learning_rate_at(const TrainingConfig& cfg, int epoch);

struct NamedModel {
  std::string name;
  const Regressor* model;
};

/// Text manifest (config + tensor names and shapes) followed by little-endian float64 data.
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedModel>& models);
/// Loads models in manifest order.
std::vector<std::pair<std::string, Regressor>> load_checkpoint(const std::filesystem::path& path);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
};

/// Central differences (step h) over every parameter of a small random regressor with
/// all three loss terms active.
GradCheckResult gradient_check(std::uint64_t seed, const LossWeights& weights, double h = 1e-5);

/// |a - n| / max(|a|, |n|, floor).
double gradient_rel_error(double analytic, double numeric);

}  // namespace trical

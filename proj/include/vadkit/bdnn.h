// vadkit/bdnn.h

// Copyright 2026  The vadkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Boosted DNN frame classifier. Each input is a dense window of frames
// around t; the network predicts the label of every frame in the window and
// a frame's posterior is the average of every output that refers to it.

#ifndef VADKIT_BDNN_H_
#define VADKIT_BDNN_H_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vadkit/corpus.h"
#include "vadkit/features.h"

namespace vadkit {

struct ContextSpec {
  int left = 9;
  int right = 19;

  int WindowSize() const { return left + right + 1; }
  void Validate() const {
    if (left < 0 || right < 0) throw VadError("context: negative extent");
  }
};

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Source frame of window slot `slot` for the window centred at `t`.
inline int64_t ContextFrame(int64_t t, int slot, const ContextSpec& spec, int64_t frames) {
  const int64_t f = t - spec.left + slot;
  return f < 0 ? 0 : (f >= frames ? frames - 1 : f);
}

struct ExpandedContext {
  RowMatrixF inputs;   // N x (window * dims)
  RowMatrixF targets;  // N x window
};

/// Edge frames are replicated.
ExpandedContext ExpandContext(const RowMatrixF& features, const FrameLabels& labels,
                              const ContextSpec& spec);

enum class Activation : uint8_t { kRelu = 1, kSigmoid = 2 };

/// Fully connected network; inputs and outputs are column-per-sample.
/// Hidden layers use ReLU and the output layer a sigmoid.
template <typename Real>
class BdnnNet {
 public:
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  BdnnNet() = default;
  /// Zero parameters.
  explicit BdnnNet(std::vector<int> layer_sizes);
  /// Uniform +/- sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static BdnnNet Init(std::vector<int> layer_sizes, uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  size_t num_layers() const { return weights.size(); }
  int64_t NumParameters() const;

  /// x: input_dim x N -> output_dim x N posteriors.
  Matrix Forward(const Matrix& x) const;
  /// Output layer pre-activations.
  Matrix Logits(const Matrix& x) const;

  struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
  };

  /// Mean |P - T| over all entries; fills `grad` when non-null. The L1
  /// subgradient at zero is zero.
  Real LossAndGradient(const Matrix& x, const Matrix& targets, Gradients* grad) const;
  Real Loss(const Matrix& x, const Matrix& targets) const {
    return LossAndGradient(x, targets, nullptr);
  }

  /// Plain SGD step; returns the loss before the update. Throws on a
  /// non-finite loss.
  Real TrainStep(const Matrix& x, const Matrix& targets, Real learning_rate);

  template <typename To>
  BdnnNet<To> Cast() const {
    BdnnNet<To> out(sizes_);
    for (size_t l = 0; l < weights.size(); ++l) {
      out.weights[l] = weights[l].template cast<To>();
      out.biases[l] = biases[l].template cast<To>();
    }
    return out;
  }

  bool AllFinite() const;

  std::vector<Matrix> weights;  // out x in
  std::vector<Vector> biases;

 private:
  void CheckInput(const Matrix& x) const;
  std::vector<int> sizes_;
};

extern template class BdnnNet<float>;
extern template class BdnnNet<double>;

using BdnnModel = BdnnNet<float>;

/// [window*dims, 512, 512, window].
std::vector<int> BdnnLayerSizes(const ContextSpec& spec, int feature_dims,
                                int hidden = 512, int hidden_layers = 2);

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 512;
  int max_epochs = 50;
  uint64_t seed = 0;
  void Validate() const;
};

struct TrainingUtterance {
  std::string id;
  RowMatrixF features;
  FrameLabels labels;
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  int epochs_run = 0;
};

/// Gathers the context windows of `frames` (utterance, frame) pairs into a
/// column-per-sample batch.
void GatherBatch(std::span<const TrainingUtterance> data,
                 std::span<const std::pair<uint32_t, uint32_t>> frames,
                 const ContextSpec& spec, Eigen::MatrixXf* inputs, Eigen::MatrixXf* targets);

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Mini-batch SGD over all frames; frame order reshuffled each epoch from
/// the seed. Deterministic given data, config and seed.
TrainStats TrainBdnn(BdnnModel& model, std::span<const TrainingUtterance> data,
                     const ContextSpec& spec, const TrainConfig& config,
                     const EpochCallback& on_epoch = nullptr);

/// Average of every window output that maps to each frame under edge
/// replication. `outputs` is window x frames.
std::vector<double> AverageWindowPredictions(const Eigen::MatrixXd& outputs,
                                             const ContextSpec& spec);
std::vector<double> AverageWindowPredictionsSerial(const Eigen::MatrixXd& outputs,
                                                   const ContextSpec& spec);

/// Per-frame speech posteriors in (0, 1).
std::vector<double> PredictFrames(const BdnnModel& model, const RowMatrixF& features,
                                  const ContextSpec& spec);

struct CheckpointMeta {
  ContextSpec context;
  int feature_dims = kFeatureDims;
  std::string feature_kind = "mfcc";
  TrainConfig train;
  int epochs_run = 0;
  std::vector<double> train_loss;
};

/// "VKBD", u32 version, u32 layers, u32 sizes[layers+1], u8 activation per
/// layer, then per layer row-major float32 weights followed by biases.
std::string EncodeCheckpoint(const BdnnModel& model);
BdnnModel DecodeCheckpoint(std::string_view bytes);
std::string CheckpointMetaToJson(const CheckpointMeta& meta);
CheckpointMeta CheckpointMetaFromJson(std::string_view json);
void WriteCheckpoint(const std::string& path, const BdnnModel& model,
                     const CheckpointMeta& meta);
BdnnModel ReadCheckpoint(const std::string& path, CheckpointMeta* meta);

struct ScoreLine {
  std::string id;
  std::vector<double> posteriors;
};

/// `<id> <space-separated posteriors>`.
std::string FormatScoreLine(const ScoreLine& line);
ScoreLine ParseScoreLine(std::string_view line);
void WriteScoreFile(const std::string& path, std::span<const ScoreLine> lines);
std::vector<ScoreLine> ReadScoreFile(const std::string& path);

RowMatrixF ToFloat(const RowMatrix& m);

}  // namespace vadkit

#endif  // VADKIT_BDNN_H_

// vadkit/bdnn.cc

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

#include "vadkit/bdnn.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace vadkit {

namespace {

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(std::string_view in, size_t pos) {
  if (pos + 4 > in.size()) throw VadError("checkpoint: truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

ExpandedContext ExpandContext(const RowMatrixF& features, const FrameLabels& labels,
                              const ContextSpec& spec) {
  spec.Validate();
  const int64_t frames = features.rows();
  const int64_t dims = features.cols();
  if (static_cast<int64_t>(labels.size()) != frames) {
    throw VadError("expand_context: labels and features differ in length");
  }
  const int window = spec.WindowSize();
  ExpandedContext out;
  out.inputs.resize(frames, window * dims);
  out.targets.resize(frames, window);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < frames; ++t) {
    for (int s = 0; s < window; ++s) {
      const int64_t f = ContextFrame(t, s, spec, frames);
      out.inputs.row(t).segment(s * dims, dims) = features.row(f);
      out.targets(t, s) = labels.labels[static_cast<size_t>(f)] ? 1.0f : 0.0f;
    }
  }
  return out;
}

template <typename Real>
BdnnNet<Real>::BdnnNet(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw VadError("bdnn: need at least input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw VadError("bdnn: layer sizes must be positive");
  }
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l]));
    biases.push_back(Vector::Zero(sizes_[l + 1]));
  }
}

template <typename Real>
BdnnNet<Real> BdnnNet<Real>::Init(std::vector<int> layer_sizes, uint64_t seed) {
  BdnnNet net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (auto& w : net.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Real>(dist(rng));
  }
  return net;
}

template <typename Real>
int64_t BdnnNet<Real>::NumParameters() const {
  int64_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

template <typename Real>
void BdnnNet<Real>::CheckInput(const Matrix& x) const {
  if (x.rows() != input_dim()) {
    throw VadError("bdnn: input has " + std::to_string(x.rows()) + " rows, model expects " +
                   std::to_string(input_dim()));
  }
}

template <typename Real>
typename BdnnNet<Real>::Matrix BdnnNet<Real>::Logits(const Matrix& x) const {
  CheckInput(x);
  Matrix h = x;
  for (size_t l = 0; l < weights.size(); ++l) {
    Matrix z = weights[l] * h;
    z.colwise() += biases[l];
    if (l + 1 < weights.size()) z = z.cwiseMax(Real(0));
    h = std::move(z);
  }
  return h;
}

template <typename Real>
typename BdnnNet<Real>::Matrix BdnnNet<Real>::Forward(const Matrix& x) const {
  Matrix z = Logits(x);
  return z.unaryExpr([](Real v) { return Real(1) / (Real(1) + std::exp(-v)); });
}

template <typename Real>
Real BdnnNet<Real>::LossAndGradient(const Matrix& x, const Matrix& targets,
                                    Gradients* grad) const {
  CheckInput(x);
  if (targets.rows() != output_dim() || targets.cols() != x.cols()) {
    throw VadError("bdnn: target shape mismatch");
  }
  const size_t layers = weights.size();
  std::vector<Matrix> acts;  // acts[0] = x, acts[l+1] = output of layer l
  acts.reserve(layers + 1);
  acts.push_back(x);
  for (size_t l = 0; l < layers; ++l) {
    Matrix z = weights[l] * acts[l];
    z.colwise() += biases[l];
    if (l + 1 < layers) {
      acts.push_back(z.cwiseMax(Real(0)));
    } else {
      acts.push_back(z.unaryExpr([](Real v) { return Real(1) / (Real(1) + std::exp(-v)); }));
    }
  }
  const Matrix& p = acts.back();
  const Matrix diff = p - targets;
  const Real count = static_cast<Real>(diff.size());
  const Real loss = diff.cwiseAbs().sum() / count;
  if (grad == nullptr) return loss;

  grad->weights.resize(layers);
  grad->biases.resize(layers);
  Matrix delta = diff.unaryExpr([](Real d) {
                   return d > Real(0) ? Real(1) : (d < Real(0) ? Real(-1) : Real(0));
                 }) / count;
  delta = delta.cwiseProduct(p.cwiseProduct((Real(1) - p.array()).matrix()));
  for (size_t l = layers; l-- > 0;) {
    grad->weights[l].noalias() = delta * acts[l].transpose();
    grad->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = weights[l].transpose() * delta;
    // ReLU derivative from the post-activation: active iff output > 0.
    delta = back.cwiseProduct(
        acts[l].unaryExpr([](Real a) { return a > Real(0) ? Real(1) : Real(0); }));
  }
  return loss;
}

template <typename Real>
Real BdnnNet<Real>::TrainStep(const Matrix& x, const Matrix& targets, Real learning_rate) {
  Gradients g;
  const Real loss = LossAndGradient(x, targets, &g);
  if (!std::isfinite(static_cast<double>(loss))) {
    throw VadError(fmt::format("bdnn: non-finite loss {} on batch of {} samples", loss,
                               x.cols()));
  }
  for (size_t l = 0; l < weights.size(); ++l) {
    weights[l].noalias() -= learning_rate * g.weights[l];
    biases[l].noalias() -= learning_rate * g.biases[l];
  }
  return loss;
}

template <typename Real>
bool BdnnNet<Real>::AllFinite() const {
  for (size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

template class BdnnNet<float>;
template class BdnnNet<double>;

std::vector<int> BdnnLayerSizes(const ContextSpec& spec, int feature_dims, int hidden,
                                int hidden_layers) {
  std::vector<int> sizes{spec.WindowSize() * feature_dims};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden);
  sizes.push_back(spec.WindowSize());
  return sizes;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0)) throw VadError("train: learning rate must be >= 0");
  if (batch_size < 1) throw VadError("train: batch size must be >= 1");
  if (max_epochs < 0) throw VadError("train: max_epochs must be >= 0");
}

void GatherBatch(std::span<const TrainingUtterance> data,
                 std::span<const std::pair<uint32_t, uint32_t>> frames,
                 const ContextSpec& spec, Eigen::MatrixXf* inputs, Eigen::MatrixXf* targets) {
  const int window = spec.WindowSize();
  const int64_t dims = data.empty() ? 0 : data[0].features.cols();
  const int64_t n = static_cast<int64_t>(frames.size());
  inputs->resize(window * dims, n);
  targets->resize(window, n);
#pragma omp parallel for schedule(static)
  for (int64_t b = 0; b < n; ++b) {
    const auto& utt = data[frames[b].first];
    const int64_t t = frames[b].second;
    const int64_t total = utt.features.rows();
    float* col = inputs->col(b).data();
    for (int s = 0; s < window; ++s) {
      const int64_t f = ContextFrame(t, s, spec, total);
      std::copy_n(utt.features.row(f).data(), dims, col + s * dims);
      (*targets)(s, b) = utt.labels.labels[static_cast<size_t>(f)] ? 1.0f : 0.0f;
    }
  }
}

TrainStats TrainBdnn(BdnnModel& model, std::span<const TrainingUtterance> data,
                     const ContextSpec& spec, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.Validate();
  spec.Validate();
  std::vector<std::pair<uint32_t, uint32_t>> all;
  for (size_t u = 0; u < data.size(); ++u) {
    if (static_cast<int64_t>(data[u].labels.size()) != data[u].features.rows()) {
      throw VadError("train: labels and features differ in length for " + data[u].id);
    }
    if (data[u].features.cols() * spec.WindowSize() != model.input_dim()) {
      throw VadError("train: feature dims do not match the model for " + data[u].id);
    }
    for (int64_t t = 0; t < data[u].features.rows(); ++t) {
      all.emplace_back(static_cast<uint32_t>(u), static_cast<uint32_t>(t));
    }
  }
  TrainStats stats;
  if (all.empty()) return stats;
  Eigen::MatrixXf x, y;
  const float lr = static_cast<float>(config.learning_rate);
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    auto order = all;
    std::mt19937_64 rng(DeriveSeed(config.seed, "epoch/" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int64_t batches = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t len = std::min<size_t>(config.batch_size, order.size() - start);
      GatherBatch(data, std::span(order).subspan(start, len), spec, &x, &y);
      try {
        total += model.TrainStep(x, y, lr);
      } catch (const VadError& e) {
        throw VadError(fmt::format("{} (epoch {}, batch {})", e.what(), epoch, batches));
      }
      ++batches;
    }
    stats.epoch_loss.push_back(total / static_cast<double>(batches));
    stats.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(epoch, stats.epoch_loss.back());
  }
  return stats;
}

std::vector<double> AverageWindowPredictions(const Eigen::MatrixXd& outputs,
                                             const ContextSpec& spec) {
  const int window = spec.WindowSize();
  if (outputs.rows() != window) throw VadError("average: outputs must have one row per slot");
  const int64_t frames = outputs.cols();
  std::vector<double> post(static_cast<size_t>(frames), 0.0);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    int64_t count = 0;
    if (t > 0 && t < frames - 1) {
      // Unclamped: slot s of window tau lands on t iff tau = t - s + left.
      // Descending s keeps tau ascending, the serial summation order.
      for (int s = window - 1; s >= 0; --s) {
        const int64_t tau = t - s + spec.left;
        if (tau < 0 || tau >= frames) continue;
        sum += outputs(s, tau);
        ++count;
      }
    } else {
      const int64_t lo = std::max<int64_t>(0, t - spec.right);
      const int64_t hi = std::min<int64_t>(frames - 1, t + spec.left);
      for (int64_t tau = lo; tau <= hi; ++tau) {
        for (int s = 0; s < window; ++s) {
          if (ContextFrame(tau, s, spec, frames) != t) continue;
          sum += outputs(s, tau);
          ++count;
        }
      }
    }
    post[t] = sum / static_cast<double>(count);
  }
  return post;
}

std::vector<double> AverageWindowPredictionsSerial(const Eigen::MatrixXd& outputs,
                                                   const ContextSpec& spec) {
  const int window = spec.WindowSize();
  if (outputs.rows() != window) throw VadError("average: outputs must have one row per slot");
  const int64_t frames = outputs.cols();
  std::vector<double> sum(static_cast<size_t>(frames), 0.0);
  std::vector<int64_t> count(static_cast<size_t>(frames), 0);
  for (int64_t tau = 0; tau < frames; ++tau) {
    for (int s = 0; s < window; ++s) {
      const int64_t f = ContextFrame(tau, s, spec, frames);
      sum[f] += outputs(s, tau);
      ++count[f];
    }
  }
  for (int64_t t = 0; t < frames; ++t) sum[t] /= static_cast<double>(count[t]);
  return sum;
}

std::vector<double> PredictFrames(const BdnnModel& model, const RowMatrixF& features,
                                  const ContextSpec& spec) {
  const int64_t frames = features.rows();
  if (frames == 0) return {};
  if (features.cols() * spec.WindowSize() != model.input_dim()) {
    throw VadError("predict: feature dims do not match the model");
  }
  TrainingUtterance utt;
  utt.features = features;
  utt.labels.labels.assign(static_cast<size_t>(frames), 0);
  std::span<const TrainingUtterance> one(&utt, 1);

  constexpr int64_t kChunk = 1024;
  Eigen::MatrixXd outputs(spec.WindowSize(), frames);
  std::vector<std::pair<uint32_t, uint32_t>> idx;
  Eigen::MatrixXf x, y;
  for (int64_t start = 0; start < frames; start += kChunk) {
    const int64_t len = std::min(kChunk, frames - start);
    idx.clear();
    for (int64_t t = start; t < start + len; ++t) idx.emplace_back(0u, static_cast<uint32_t>(t));
    GatherBatch(one, idx, spec, &x, &y);
    const Eigen::MatrixXf logits = model.Logits(x);
    outputs.middleCols(start, len) = logits.cast<double>().unaryExpr(
        [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  auto post = AverageWindowPredictions(outputs, spec);
  // Saturated logits would round to exactly 0 or 1 in double.
  for (double& p : post) {
    p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  }
  return post;
}

std::string EncodeCheckpoint(const BdnnModel& model) {
  std::string out = "VKBD";
  PutU32(out, 1);
  PutU32(out, static_cast<uint32_t>(model.num_layers()));
  for (int s : model.layer_sizes()) PutU32(out, static_cast<uint32_t>(s));
  for (size_t l = 0; l < model.num_layers(); ++l) {
    const bool last = l + 1 == model.num_layers();
    out.push_back(static_cast<char>(last ? Activation::kSigmoid : Activation::kRelu));
  }
  for (size_t l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) PutU32(out, std::bit_cast<uint32_t>(w(r, c)));
    }
    for (Eigen::Index r = 0; r < model.biases[l].size(); ++r) {
      PutU32(out, std::bit_cast<uint32_t>(model.biases[l][r]));
    }
  }
  return out;
}

BdnnModel DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "VKBD") throw VadError("checkpoint: bad magic");
  if (GetU32(bytes, 4) != 1) throw VadError("checkpoint: unsupported version");
  const uint32_t layers = GetU32(bytes, 8);
  if (layers == 0 || layers > 64) throw VadError("checkpoint: bad layer count");
  size_t pos = 12;
  std::vector<int> sizes;
  for (uint32_t i = 0; i <= layers; ++i, pos += 4) {
    sizes.push_back(static_cast<int>(GetU32(bytes, pos)));
  }
  for (uint32_t l = 0; l < layers; ++l, ++pos) {
    if (pos >= bytes.size()) throw VadError("checkpoint: truncated");
    const auto tag = static_cast<Activation>(bytes[pos]);
    const auto expect = l + 1 == layers ? Activation::kSigmoid : Activation::kRelu;
    if (tag != expect) throw VadError("checkpoint: unsupported activation layout");
  }
  BdnnModel model(sizes);
  for (uint32_t l = 0; l < layers; ++l) {
    auto& w = model.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c, pos += 4) {
        w(r, c) = std::bit_cast<float>(GetU32(bytes, pos));
      }
    }
    for (Eigen::Index r = 0; r < model.biases[l].size(); ++r, pos += 4) {
      model.biases[l][r] = std::bit_cast<float>(GetU32(bytes, pos));
    }
  }
  if (pos != bytes.size()) throw VadError("checkpoint: trailing bytes");
  return model;
}

std::string CheckpointMetaToJson(const CheckpointMeta& m) {
  nlohmann::ordered_json j;
  j["context_left"] = m.context.left;
  j["context_right"] = m.context.right;
  j["feature_dims"] = m.feature_dims;
  j["feature_kind"] = m.feature_kind;
  j["hidden_activation"] = "relu";
  j["output_activation"] = "sigmoid";
  j["loss"] = "l1";
  j["optimizer"] = "sgd";
  j["learning_rate"] = m.train.learning_rate;
  j["batch_size"] = m.train.batch_size;
  j["max_epochs"] = m.train.max_epochs;
  j["seed"] = m.train.seed;
  j["epochs_run"] = m.epochs_run;
  j["train_loss"] = m.train_loss;
  return j.dump(2);
}

CheckpointMeta CheckpointMetaFromJson(std::string_view json) {
  CheckpointMeta m;
  try {
    const auto j = nlohmann::json::parse(json);
    m.context.left = j.at("context_left").get<int>();
    m.context.right = j.at("context_right").get<int>();
    m.feature_dims = j.at("feature_dims").get<int>();
    m.feature_kind = j.value("feature_kind", "mfcc");
    m.train.learning_rate = j.value("learning_rate", 0.001);
    m.train.batch_size = j.value("batch_size", 512);
    m.train.max_epochs = j.value("max_epochs", 50);
    m.train.seed = j.value("seed", uint64_t{0});
    m.epochs_run = j.value("epochs_run", 0);
    m.train_loss = j.value("train_loss", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw VadError(std::string("checkpoint metadata: ") + e.what());
  }
  return m;
}

void WriteCheckpoint(const std::string& path, const BdnnModel& model,
                     const CheckpointMeta& meta) {
  WriteFileAtomic(path, EncodeCheckpoint(model));
  WriteFileAtomic(path + ".json", CheckpointMetaToJson(meta) + "\n");
}

BdnnModel ReadCheckpoint(const std::string& path, CheckpointMeta* meta) {
  auto model = DecodeCheckpoint(ReadFileToString(path));
  if (meta != nullptr) *meta = CheckpointMetaFromJson(ReadFileToString(path + ".json"));
  return model;
}

std::string FormatScoreLine(const ScoreLine& line) {
  std::string out = line.id;
  for (double p : line.posteriors) fmt::format_to(std::back_inserter(out), " {:.6f}", p);
  return out;
}

ScoreLine ParseScoreLine(std::string_view line) {
  ScoreLine out;
  size_t pos = line.find(' ');
  out.id = std::string(line.substr(0, pos));
  if (out.id.empty()) throw VadError("score line: missing id");
  while (pos != std::string_view::npos) {
    const size_t start = pos + 1;
    pos = line.find(' ', start);
    const auto tok = line.substr(start, pos == std::string_view::npos ? line.size() - start
                                                                      : pos - start);
    if (tok.empty() || tok == "\r") continue;
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc()) throw VadError("score line: bad value in " + out.id);
    out.posteriors.push_back(v);
  }
  return out;
}

void WriteScoreFile(const std::string& path, std::span<const ScoreLine> lines) {
  std::string out;
  for (const auto& l : lines) {
    out += FormatScoreLine(l);
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<ScoreLine> ReadScoreFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw VadError("cannot open score file " + path);
  std::vector<ScoreLine> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(ParseScoreLine(line));
  }
  return out;
}

RowMatrixF ToFloat(const RowMatrix& m) { return m.cast<float>(); }

}  // namespace vadkit

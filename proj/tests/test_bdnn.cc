// vadkit/test_bdnn.cc

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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "gaussian_task.h"
#include "test_util.h"
#include "vadkit/bdnn.h"
#include "vadkit/metrics.h"

namespace vadkit {
namespace {

using testing::GaussianFrames;
using testing::TempDir;
using NetD = BdnnNet<double>;

RowMatrixF RandomFeatures(int frames, int dims, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  RowMatrixF m(frames, dims);
  for (int i = 0; i < frames; ++i)
    for (int d = 0; d < dims; ++d) m(i, d) = g(rng);
  return m;
}

FrameLabels AlternatingLabels(int frames, int period) {
  FrameLabels l;
  for (int i = 0; i < frames; ++i) l.labels.push_back(static_cast<uint8_t>((i / period) % 2));
  return l;
}

// --- context expansion ---

TEST(ExpandContext, DefaultGeometry) {
  ContextSpec cs;
  EXPECT_EQ(cs.WindowSize(), 29);
  EXPECT_EQ(BdnnLayerSizes(cs, 39), (std::vector<int>{1131, 512, 512, 29}));
}

TEST(ExpandContext, MatchesBruteForce) {
  const ContextSpec cs{3, 5};
  const int frames = 23, dims = 4;
  const auto feat = RandomFeatures(frames, dims, 1);
  const auto lab = AlternatingLabels(frames, 3);
  const auto ex = ExpandContext(feat, lab, cs);
  ASSERT_EQ(ex.inputs.rows(), frames);
  ASSERT_EQ(ex.inputs.cols(), cs.WindowSize() * dims);
  ASSERT_EQ(ex.targets.cols(), cs.WindowSize());
  for (int t = 0; t < frames; ++t) {
    for (int s = 0; s < cs.WindowSize(); ++s) {
      int f = t - cs.left + s;
      f = std::max(0, std::min(frames - 1, f));
      for (int d = 0; d < dims; ++d) EXPECT_EQ(ex.inputs(t, s * dims + d), feat(f, d));
      EXPECT_EQ(ex.targets(t, s), lab.labels[f] ? 1.0f : 0.0f);
    }
  }
}

TEST(ExpandContext, FirstFrameReplicatesEdge) {
  const ContextSpec cs;
  const auto feat = RandomFeatures(40, 39, 2);
  const auto ex = ExpandContext(feat, AlternatingLabels(40, 5), cs);
  EXPECT_EQ(ex.inputs.cols(), 1131);
  for (int s = 0; s <= cs.left; ++s)
    for (int d = 0; d < 39; ++d) EXPECT_EQ(ex.inputs(0, s * 39 + d), feat(0, d));
  // Slot left+1 holds frame 1.
  EXPECT_EQ(ex.inputs(0, (cs.left + 1) * 39), feat(1, 0));
}

TEST(ExpandContext, EmptyAndMismatched) {
  const ContextSpec cs;
  const auto ex = ExpandContext(RowMatrixF(0, 39), FrameLabels{}, cs);
  EXPECT_EQ(ex.inputs.rows(), 0);
  EXPECT_THROW(ExpandContext(RandomFeatures(5, 39, 3), AlternatingLabels(4, 1), cs), VadError);
}

TEST(ExpandContext, GatherBatchAgrees) {
  const ContextSpec cs{2, 4};
  TrainingUtterance u{"a", RandomFeatures(17, 3, 4), AlternatingLabels(17, 2)};
  const auto ex = ExpandContext(u.features, u.labels, cs);
  std::vector<std::pair<uint32_t, uint32_t>> idx;
  for (uint32_t t = 0; t < 17; ++t) idx.emplace_back(0u, t);
  Eigen::MatrixXf x, y;
  GatherBatch(std::span(&u, 1), idx, cs, &x, &y);
  EXPECT_TRUE(x.transpose().isApprox(Eigen::MatrixXf(ex.inputs), 0.0f));
  EXPECT_TRUE(y.transpose().isApprox(Eigen::MatrixXf(ex.targets), 0.0f));
}

// --- forward pass ---

TEST(Forward, ZeroWeightsGiveHalf) {
  BdnnModel m({6, 5, 3});
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(6, 7);
  const auto p = m.Forward(x);
  EXPECT_EQ(p.rows(), 3);
  EXPECT_EQ(p.cols(), 7);
  EXPECT_TRUE((p.array() == 0.5f).all());
}

NetD::Matrix ReferenceForward(const NetD& net, const NetD::Matrix& x) {
  NetD::Matrix out(net.output_dim(), x.cols());
  for (int n = 0; n < x.cols(); ++n) {
    std::vector<double> h(x.col(n).data(), x.col(n).data() + x.rows());
    for (size_t l = 0; l < net.num_layers(); ++l) {
      const auto& w = net.weights[l];
      std::vector<double> z(static_cast<size_t>(w.rows()));
      for (int i = 0; i < w.rows(); ++i) {
        double acc = net.biases[l](i);
        for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * h[static_cast<size_t>(j)];
        const bool last = l + 1 == net.num_layers();
        z[static_cast<size_t>(i)] = last ? 1.0 / (1.0 + std::exp(-acc)) : std::max(0.0, acc);
      }
      h = std::move(z);
    }
    for (int i = 0; i < out.rows(); ++i) out(i, n) = h[static_cast<size_t>(i)];
  }
  return out;
}

TEST(Forward, MatchesHandRolledLoops) {
  auto net = NetD::Init({12, 9, 7, 4}, 5);
  for (auto& b : net.biases) b.setRandom();
  const NetD::Matrix x = NetD::Matrix::Random(12, 11);
  const auto p = net.Forward(x);
  const auto ref = ReferenceForward(net, x);
  EXPECT_LT((p - ref).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Forward, BatchingInvariant) {
  const auto m = BdnnModel::Init({10, 8, 8, 3}, 9);
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(10, 20);
  const auto all = m.Forward(x);
  for (int n = 0; n < 20; ++n) {
    const Eigen::MatrixXf one = m.Forward(x.col(n));
    EXPECT_LT((one - all.col(n)).cwiseAbs().maxCoeff(), 1e-6f);
  }
}

TEST(Forward, InitRangeAndShape) {
  const auto m = BdnnModel::Init({100, 50, 10}, 1);
  EXPECT_EQ(m.NumParameters(), 100 * 50 + 50 + 50 * 10 + 10);
  const float lim = std::sqrt(6.0f / 150.0f);
  EXPECT_LE(m.weights[0].cwiseAbs().maxCoeff(), lim);
  EXPECT_GT(m.weights[0].cwiseAbs().maxCoeff(), 0.9f * lim);
  EXPECT_TRUE((m.biases[0].array() == 0.0f).all());
  const auto again = BdnnModel::Init({100, 50, 10}, 1);
  EXPECT_TRUE(m.weights[0] == again.weights[0]);
  EXPECT_THROW(m.Forward(Eigen::MatrixXf::Zero(99, 1)), VadError);
  EXPECT_THROW(BdnnModel({5}), VadError);
  EXPECT_THROW(BdnnModel({5, 0, 2}), VadError);
}

// --- loss and gradient ---

TEST(Gradient, MatchesFiniteDifferences) {
  auto net = NetD::Init({8, 6, 5, 3}, 21);
  for (auto& b : net.biases) b.setRandom();
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetD::Matrix x(8, 10), t(3, 10);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  for (int i = 0; i < t.size(); ++i) t.data()[i] = u(rng) > 0 ? 1.0 : 0.0;

  NetD::Gradients g;
  net.LossAndGradient(x, t, &g);
  const double eps = 1e-5;
  int checked = 0;
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double keep = param;
    // Skip parameters whose perturbation crosses a ReLU kink.
    const auto logits = [&]() {
      std::vector<NetD::Matrix> pre;
      NetD::Matrix h = x;
      for (size_t l = 0; l + 1 < net.num_layers(); ++l) {
        NetD::Matrix z = net.weights[l] * h;
        z.colwise() += net.biases[l];
        pre.push_back(z);
        h = z.cwiseMax(0.0);
      }
      return pre;
    };
    param = keep + eps;
    const auto up = logits();
    const double lp = net.Loss(x, t);
    param = keep - eps;
    const auto down = logits();
    const double lm = net.Loss(x, t);
    param = keep;
    for (size_t l = 0; l < up.size(); ++l)
      if (((up[l].array() > 0) != (down[l].array() > 0)).any()) return;
    const double numeric = (lp - lm) / (2 * eps);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
    ++checked;
  };
  for (size_t l = 0; l < net.num_layers(); ++l) {
    for (int i = 0; i < net.weights[l].size(); ++i)
      probe(net.weights[l].data()[i], g.weights[l].data()[i]);
    for (int i = 0; i < net.biases[l].size(); ++i)
      probe(net.biases[l].data()[i], g.biases[l].data()[i]);
  }
  EXPECT_GT(checked, static_cast<int>(net.NumParameters() * 3 / 4));
  EXPECT_LT(worst, 1e-4);
}

TEST(Gradient, LossIsMeanAbsoluteError) {
  BdnnModel m({2, 3});
  Eigen::MatrixXf x = Eigen::MatrixXf::Zero(2, 4);
  Eigen::MatrixXf t(3, 4);
  t << 1, 0, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1;
  EXPECT_FLOAT_EQ(m.Loss(x, t), 0.5f);
  EXPECT_THROW(m.Loss(x, Eigen::MatrixXf::Zero(3, 3)), VadError);
}

TEST(TrainStep, ZeroLearningRateLeavesModel) {
  auto m = BdnnModel::Init({6, 4, 2}, 3);
  const auto before = m;
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(6, 9);
  const Eigen::MatrixXf t = Eigen::MatrixXf::Ones(2, 9);
  m.TrainStep(x, t, 0.0f);
  for (size_t l = 0; l < m.num_layers(); ++l) {
    EXPECT_TRUE(m.weights[l] == before.weights[l]);
    EXPECT_TRUE(m.biases[l] == before.biases[l]);
  }
}

TEST(TrainStep, SmallStepReducesLoss) {
  auto m = BdnnModel::Init({6, 4, 2}, 3);
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(6, 9);
  const Eigen::MatrixXf t = Eigen::MatrixXf::Ones(2, 9);
  const float before = m.TrainStep(x, t, 0.01f);
  EXPECT_LT(m.Loss(x, t), before);
}

TEST(TrainStep, NonFiniteInputThrows) {
  auto m = BdnnModel::Init({3, 2}, 3);
  Eigen::MatrixXf x = Eigen::MatrixXf::Ones(3, 2);
  x(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(m.TrainStep(x, Eigen::MatrixXf::Ones(2, 2), 0.1f), VadError);
}

// --- training loop ---

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = 0.0;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = -1e-3;
  EXPECT_THROW(c.Validate(), VadError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.Validate(), VadError);
  c = TrainConfig{};
  c.learning_rate = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(c.Validate(), VadError);
}

TEST(TrainBdnn, DeterministicForSeed) {
  const ContextSpec cs{2, 3};
  const auto data = GaussianFrames(4, 80, 5, 1.0, 7);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.05;
  cfg.seed = 11;
  auto a = BdnnModel::Init(BdnnLayerSizes(cs, 5, 16, 1), 1);
  auto b = a;
  const auto sa = TrainBdnn(a, data, cs, cfg);
  const auto sb = TrainBdnn(b, data, cs, cfg);
  EXPECT_EQ(sa.epochs_run, 2);
  EXPECT_EQ(sa.epoch_loss, sb.epoch_loss);
  for (size_t l = 0; l < a.num_layers(); ++l) EXPECT_TRUE(a.weights[l] == b.weights[l]);
}

TEST(TrainBdnn, RejectsMismatchedData) {
  const ContextSpec cs{1, 1};
  auto m = BdnnModel::Init(BdnnLayerSizes(cs, 4, 8, 1), 1);
  auto data = GaussianFrames(1, 20, 5, 1.0, 1);
  EXPECT_THROW(TrainBdnn(m, data, cs, TrainConfig{}), VadError);
  data = GaussianFrames(1, 20, 4, 1.0, 1);
  data[0].labels.labels.pop_back();
  EXPECT_THROW(TrainBdnn(m, data, cs, TrainConfig{}), VadError);
  const auto stats = TrainBdnn(m, std::vector<TrainingUtterance>{}, cs, TrainConfig{});
  EXPECT_EQ(stats.epochs_run, 0);
}

TEST(TrainBdnn, LearnsSeparableToyTask) {
  const ContextSpec cs{2, 2};
  const auto train = GaussianFrames(20, 200, 8, 1.0, 3);
  const auto test = GaussianFrames(6, 200, 8, 1.0, 4);
  auto m = BdnnModel::Init(BdnnLayerSizes(cs, 8, 32, 1), 2);
  TrainConfig cfg;
  cfg.max_epochs = 15;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.5;
  const auto stats = TrainBdnn(m, train, cs, cfg);
  EXPECT_LT(stats.epoch_loss.back(), stats.epoch_loss.front());
  ScoreSet s;
  for (const auto& u : test) {
    const auto p = PredictFrames(m, u.features, cs);
    s.scores.insert(s.scores.end(), p.begin(), p.end());
    s.labels.insert(s.labels.end(), u.labels.labels.begin(), u.labels.labels.end());
  }
  EXPECT_GT(RocAuc(s), 0.95);
}

// --- window averaging ---

TEST(Average, MatchesEnumeration) {
  const ContextSpec cs;
  const int frames = 50;
  const Eigen::MatrixXd out = Eigen::MatrixXd::Random(cs.WindowSize(), frames);
  const auto post = AverageWindowPredictions(out, cs);
  ASSERT_EQ(post.size(), 50u);
  for (int t = 0; t < frames; ++t) {
    double sum = 0.0;
    int count = 0;
    for (int tau = 0; tau < frames; ++tau) {
      for (int s = 0; s < cs.WindowSize(); ++s) {
        int f = std::max(0, std::min(frames - 1, tau - cs.left + s));
        if (f == t) {
          sum += out(s, tau);
          ++count;
        }
      }
    }
    if (t >= cs.right && t + cs.left < frames) {
      EXPECT_EQ(count, 29) << t;
    }
    EXPECT_NEAR(post[t], sum / count, 1e-12) << t;
  }
}

TEST(Average, ParallelMatchesSerial) {
  const ContextSpec cs{4, 7};
  for (int frames : {1, 3, 12, 500}) {
    const Eigen::MatrixXd out = Eigen::MatrixXd::Random(cs.WindowSize(), frames);
    const auto a = AverageWindowPredictions(out, cs);
    const auto b = AverageWindowPredictionsSerial(out, cs);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Average, NoContextIsIdentity) {
  const ContextSpec cs{0, 0};
  const Eigen::MatrixXd out = Eigen::MatrixXd::Random(1, 9);
  const auto post = AverageWindowPredictions(out, cs);
  for (int t = 0; t < 9; ++t) EXPECT_EQ(post[t], out(0, t));
}

TEST(Average, SingleFrameAveragesAllSlots) {
  const ContextSpec cs;
  const Eigen::MatrixXd out = Eigen::MatrixXd::Random(cs.WindowSize(), 1);
  const auto post = AverageWindowPredictions(out, cs);
  ASSERT_EQ(post.size(), 1u);
  EXPECT_NEAR(post[0], out.mean(), 1e-12);
  EXPECT_THROW(AverageWindowPredictions(Eigen::MatrixXd::Zero(3, 4), cs), VadError);
}

TEST(PredictFrames, OpenUnitIntervalAndLength) {
  const ContextSpec cs;
  auto m = BdnnModel::Init(BdnnLayerSizes(cs, 39, 16, 1), 4);
  m.biases.back().setConstant(200.0f);  // saturates the output
  const auto p = PredictFrames(m, RandomFeatures(1500, 39, 5), cs);
  ASSERT_EQ(p.size(), 1500u);
  for (double v : p) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_TRUE(PredictFrames(m, RowMatrixF(0, 39), cs).empty());
  EXPECT_THROW(PredictFrames(m, RandomFeatures(5, 13, 1), cs), VadError);
}

TEST(PredictFrames, ChunkingMatchesDirectEvaluation) {
  const ContextSpec cs{3, 4};
  const auto m = BdnnModel::Init(BdnnLayerSizes(cs, 6, 8, 1), 8);
  const auto feat = RandomFeatures(1100, 6, 9);
  const auto ex = ExpandContext(feat, [] {
    FrameLabels l;
    l.labels.assign(1100, 0);
    return l;
  }(), cs);
  const Eigen::MatrixXd out = m.Forward(Eigen::MatrixXf(ex.inputs.transpose())).cast<double>();
  const auto ref = AverageWindowPredictionsSerial(out, cs);
  const auto p = PredictFrames(m, feat, cs);
  for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], ref[i], 1e-6);
}

// --- persistence ---

TEST(Checkpoint, RoundTripBitExact) {
  auto m = BdnnModel::Init({12, 7, 5}, 6);
  m.biases[0].setRandom();
  const std::string bytes = EncodeCheckpoint(m);
  EXPECT_EQ(bytes.substr(0, 4), "VKBD");
  const auto back = DecodeCheckpoint(bytes);
  EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
  for (size_t l = 0; l < m.num_layers(); ++l) {
    EXPECT_TRUE(back.weights[l] == m.weights[l]);
    EXPECT_TRUE(back.biases[l] == m.biases[l]);
  }
  EXPECT_EQ(EncodeCheckpoint(back), bytes);
}

TEST(Checkpoint, CorruptionDetected) {
  const std::string bytes = EncodeCheckpoint(BdnnModel::Init({4, 3, 2}, 1));
  EXPECT_THROW(DecodeCheckpoint(bytes + "x"), VadError);
  EXPECT_THROW(DecodeCheckpoint(bytes.substr(0, bytes.size() - 1)), VadError);
  EXPECT_THROW(DecodeCheckpoint("XXXX" + bytes.substr(4)), VadError);
  std::string bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(DecodeCheckpoint(bad), VadError);
  EXPECT_THROW(DecodeCheckpoint(""), VadError);
}

TEST(Checkpoint, FileWithMetadata) {
  TempDir dir("ckpt");
  CheckpointMeta meta;
  meta.context = {4, 6};
  meta.feature_kind = "gfcc";
  meta.train.learning_rate = 0.01;
  meta.train.seed = 99;
  meta.epochs_run = 3;
  meta.train_loss = {0.4, 0.3, 0.25};
  const auto m = BdnnModel::Init({6, 4, 2}, 2);
  WriteCheckpoint(dir / "m.vkbd", m, meta);
  CheckpointMeta got;
  const auto back = ReadCheckpoint(dir / "m.vkbd", &got);
  EXPECT_TRUE(back.weights[1] == m.weights[1]);
  EXPECT_EQ(got.context.left, 4);
  EXPECT_EQ(got.context.right, 6);
  EXPECT_EQ(got.feature_kind, "gfcc");
  EXPECT_EQ(got.train.seed, 99u);
  EXPECT_DOUBLE_EQ(got.train.learning_rate, 0.01);
  EXPECT_EQ(got.epochs_run, 3);
  EXPECT_EQ(got.train_loss, meta.train_loss);
  EXPECT_THROW(CheckpointMetaFromJson("{}"), VadError);
  EXPECT_THROW(CheckpointMetaFromJson("not json"), VadError);
}

TEST(ScoreFile, FormatAndRoundTrip) {
  EXPECT_EQ(FormatScoreLine({"utt1", {0.5, 0.1234567, 1e-9}}), "utt1 0.500000 0.123457 0.000000");
  const auto line = ParseScoreLine("a/b 0.25 0.75");
  EXPECT_EQ(line.id, "a/b");
  EXPECT_EQ(line.posteriors, (std::vector<double>{0.25, 0.75}));
  EXPECT_THROW(ParseScoreLine(" 0.1"), VadError);
  EXPECT_THROW(ParseScoreLine("x 0.1 zz"), VadError);

  TempDir dir("scores");
  const std::vector<ScoreLine> lines = {{"x", {0.1, 0.2}}, {"y", {}}, {"z", {0.9}}};
  WriteScoreFile(dir / "s.txt", lines);
  const auto back = ReadScoreFile(dir / "s.txt");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].id, "x");
  EXPECT_EQ(back[0].posteriors, lines[0].posteriors);
  EXPECT_TRUE(back[1].posteriors.empty());
  EXPECT_THROW(ReadScoreFile(dir / "missing.txt"), VadError);
}

}  // namespace
}  // namespace vadkit

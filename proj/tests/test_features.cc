// vadkit/test_features.cc

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

#include <cmath>
#include <random>

#include "oracles.h"
#include "test_util.h"
#include "vadkit/features.h"
#include "vadkit/labeling.h"

namespace vadkit {
namespace {

using testing::DeltaOracle;

using testing::TempDir;

std::vector<float> Tone(double hz, int64_t n, double amp = 0.5) {
  std::vector<float> x(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = static_cast<float>(amp * std::sin(2 * M_PI * hz * i / 16000.0));
  }
  return x;
}

RowMatrix RandomMatrix(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.3, 2.0);
  RowMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = g(rng);
  }
  return m;
}

TEST(Preemphasis, Examples) {
  const auto c = Preemphasis(std::vector<float>{2, 2, 2});
  EXPECT_FLOAT_EQ(c[0], 2.0f);
  EXPECT_NEAR(c[1], 0.06f, 1e-6);
  EXPECT_NEAR(c[2], 0.06f, 1e-6);
  const auto imp = Preemphasis(std::vector<float>{1, 0, 0});
  EXPECT_FLOAT_EQ(imp[0], 1.0f);
  EXPECT_FLOAT_EQ(imp[1], -0.97f);
  EXPECT_FLOAT_EQ(imp[2], 0.0f);
  const std::vector<float> x = {0.1f, -0.4f, 0.25f};
  EXPECT_EQ(Preemphasis(x, 0.0), x);
  EXPECT_THROW(Preemphasis(std::vector<float>{}), VadError);
}

TEST(Mfcc, OneSecondShape) {
  FeatureExtractor ex(FeatureOptions::Mfcc());
  const auto f = ex.Static(testing::WhiteNoise(16000, 0.1, 1));
  EXPECT_EQ(f.frames(), 98);
  EXPECT_EQ(f.dims(), 13);
  EXPECT_EQ(ComputeFeatures(testing::WhiteNoise(16000, 0.1, 1), FeatureOptions::Mfcc()).dims(), 39);
}

TEST(Mfcc, ShorterThanOneWindowIsEmpty) {
  FeatureExtractor ex(FeatureOptions::Mfcc());
  EXPECT_EQ(ex.Static(std::vector<float>(399, 0.1f)).frames(), 0);
}

size_t Nearest(const std::vector<double>& centers, double hz) {
  size_t best = 0;
  for (size_t m = 0; m < centers.size(); ++m) {
    if (std::abs(centers[m] - hz) < std::abs(centers[best] - hz)) best = m;
  }
  return best;
}

void ExpectToneArgmax(const FeatureOptions& opts, const std::vector<double>& centers) {
  FeatureExtractor ex(opts);
  const Eigen::MatrixXd e = ex.FilterbankEnergies(Tone(1000.0, 16000));
  const size_t want = Nearest(centers, 1000.0);
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    Eigen::Index arg = 0;
    e.row(t).maxCoeff(&arg);
    ASSERT_EQ(static_cast<size_t>(arg), want) << t;
  }
}

TEST(Mfcc, ToneLandsInNearestFilter) {
  ExpectToneArgmax(FeatureOptions::Mfcc(), MelCenterFrequencies(24, 50.0, 8000.0));
}

TEST(Gfcc, ToneLandsInNearestFilter) {
  ExpectToneArgmax(FeatureOptions::Gfcc(), ErbCenterFrequencies(64, 50.0, 8000.0));
}

TEST(Mfcc, SilenceHitsTheLogFloor) {
  for (auto opts : {FeatureOptions::Mfcc(), FeatureOptions::Gfcc()}) {
    FeatureExtractor ex(opts);
    const auto f = ex.Static(std::vector<float>(8000, 0.0f));
    for (Eigen::Index t = 0; t < f.frames(); ++t) {
      EXPECT_DOUBLE_EQ(f.values(t, 12), std::log(1e-10));
      for (int c = 0; c < 12; ++c) EXPECT_NEAR(f.values(t, c), 0.0, 1e-12);
    }
  }
}

TEST(Gfcc, ErbCentersAreEquallySpaced) {
  const auto c = ErbCenterFrequencies(64, 50.0, 8000.0);
  EXPECT_NEAR(c.front(), 50.0, 1e-9);
  EXPECT_NEAR(c.back(), 8000.0, 1e-6);
  const double step = HzToErb(c[1]) - HzToErb(c[0]);
  for (size_t m = 1; m < c.size(); ++m) {
    EXPECT_NEAR(HzToErb(c[m]) - HzToErb(c[m - 1]), step, 1e-9);
  }
}

TEST(Gfcc, ErbCountFormula) {
  EXPECT_NEAR(HzToErb(8000.0) - HzToErb(50.0), 31.5, 0.1);
  EXPECT_EQ(ErbFilterCount(50.0, 8000.0), 31);
  EXPECT_EQ(FeatureOptions::Gfcc().num_filters, 64);
}

TEST(Scales, InversesRoundTrip) {
  for (double hz = 0.0; hz <= 8000.0; hz += 125.0) {
    EXPECT_NEAR(MelToHz(HzToMel(hz)), hz, 1e-8);
    EXPECT_NEAR(ErbToHz(HzToErb(hz)), hz, 1e-8);
  }
}

TEST(Filterbank, MelPartitionIsPositiveAndBounded) {
  const auto fb = MelFilterbank(24, 512, 16000, 50.0, 8000.0);
  for (int k = 0; k < fb.cols(); ++k) {
    const double hz = 16000.0 * k / 512;
    const double sum = fb.col(k).sum();
    if (hz > 50.0 && hz < 8000.0) {
      EXPECT_GT(sum, 0.0) << k;
    }
    EXPECT_LE(sum, 1.0) << k;
  }
  for (int m = 0; m < fb.rows(); ++m) EXPECT_NEAR(fb.row(m).sum(), 1.0, 1e-12);
}

TEST(Dct, OrthonormalRoundTrip) {
  const auto d = DctMatrix(24);
  EXPECT_TRUE((d * d.transpose()).isIdentity(1e-12));
  FeatureExtractor ex(FeatureOptions::Mfcc());
  const Eigen::MatrixXd e = ex.FilterbankEnergies(testing::WhiteNoise(4000, 0.1, 3));
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    const Eigen::VectorXd logfb = e.row(t).transpose().array().max(1e-10).log();
    const Eigen::VectorXd ceps = d * logfb;
    EXPECT_LT((d.transpose() * ceps - logfb).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Static, ParallelEqualsSerial) {
  const auto x = testing::WhiteNoise(80000, 0.1, 4);
  for (auto opts : {FeatureOptions::Mfcc(), FeatureOptions::Gfcc()}) {
    FeatureExtractor ex(opts);
    EXPECT_EQ(ex.Static(x).values, ex.StaticSerial(x).values);
  }
}

TEST(Deltas, ConstantGivesZero) {
  FeatureMatrix f;
  f.values = RowMatrix::Constant(20, 13, 3.5);
  const auto d = AddDeltas(f);
  EXPECT_EQ(d.dims(), 39);
  EXPECT_TRUE(d.values.rightCols(26).isZero(0.0));
}

TEST(Deltas, RampHasUnitSlope) {
  FeatureMatrix f;
  f.values.resize(30, 1);
  for (int t = 0; t < 30; ++t) f.values(t, 0) = t;
  const auto d = AddDeltas(f);
  for (int t = 2; t < 28; ++t) EXPECT_DOUBLE_EQ(d.values(t, 1), 1.0) << t;
  for (int t = 4; t < 26; ++t) EXPECT_DOUBLE_EQ(d.values(t, 2), 0.0) << t;
}

TEST(Deltas, MatchBruteForceExactly) {
  for (int rows : {1, 2, 3, 5, 40}) {
    FeatureMatrix f;
    f.values = RandomMatrix(rows, 13, static_cast<uint64_t>(rows));
    const auto d = AddDeltas(f);
    const RowMatrix d1 = DeltaOracle(f.values);
    const RowMatrix d2 = DeltaOracle(d1);
    EXPECT_EQ(d.values.leftCols(13), f.values);
    EXPECT_EQ(RowMatrix(d.values.middleCols(13, 13)), d1);
    EXPECT_EQ(RowMatrix(d.values.rightCols(13)), d2);
  }
}

TEST(Cmvn, RandomMatrixIsStandardised) {
  FeatureMatrix f;
  f.values = RandomMatrix(500, 39, 7);
  const auto n = Cmvn(f);
  for (int j = 0; j < 39; ++j) {
    const auto col = n.values.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_LT(std::abs(sd - 1.0), 1e-4);
  }
}

TEST(Cmvn, IdempotentAndConstantDimsZeroed) {
  FeatureMatrix f;
  f.values = RandomMatrix(100, 5, 8);
  f.values.col(2).setConstant(4.0);
  const auto once = Cmvn(f);
  EXPECT_TRUE(once.values.col(2).isZero(0.0));
  const auto twice = Cmvn(once);
  EXPECT_LT((twice.values - once.values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Cmvn, SingleFrameIsMeanOnly) {
  FeatureMatrix f;
  f.values = RandomMatrix(1, 4, 9);
  EXPECT_TRUE(Cmvn(f).values.isZero(0.0));
}

TEST(Pipeline, ShapeAndLabelAlignment) {
  const auto voice_len = 16000 * 3 + 123;
  const auto x = testing::WhiteNoise(static_cast<size_t>(voice_len), 0.1, 2);
  const auto track = MakeTrack("u", voice_len / 16000.0,
                               std::vector<std::pair<double, double>>{{0.5, 1.5}});
  const auto labels = LabelsFromTrack(track, FrameParams(), voice_len);
  for (auto opts : {FeatureOptions::Mfcc(), FeatureOptions::Gfcc()}) {
    const auto f = ComputeFeatures(x, opts);
    EXPECT_EQ(f.dims(), kFeatureDims);
    EXPECT_EQ(static_cast<size_t>(f.frames()), labels.size());
    EXPECT_TRUE(f.values.allFinite());
    for (int j = 0; j < 39; ++j) {
      const auto col = f.values.col(j);
      const double mean = col.mean();
      EXPECT_LT(std::abs(mean), 1e-6);
      EXPECT_LT(std::abs(std::sqrt((col.array() - mean).square().mean()) - 1.0), 1e-4);
    }
  }
}

TEST(FeatureFile, RoundTripAsFloat32) {
  TempDir dir("feat");
  FeatureMatrix f;
  f.kind = FeatureKind::kGfcc;
  f.values = RandomMatrix(17, 39, 10);
  WriteFeatureFile(dir / "a.vkft", f, R"({"id":"a"})");
  const auto back = ReadFeatureFile(dir / "a.vkft");
  EXPECT_EQ(back.kind, FeatureKind::kGfcc);
  EXPECT_EQ(back.frame_params, FrameParams());
  ASSERT_EQ(back.frames(), 17);
  for (int t = 0; t < 17; ++t) {
    for (int j = 0; j < 39; ++j) {
      EXPECT_EQ(back.values(t, j), static_cast<double>(static_cast<float>(f.values(t, j))));
    }
  }
  auto bytes = EncodeFeatures(f);
  bytes.pop_back();
  EXPECT_THROW(DecodeFeatures(bytes), VadError);
  EXPECT_THROW(DecodeFeatures("XXXX"), VadError);
}

TEST(FeatureOptions, Validation) {
  auto o = FeatureOptions::Mfcc();
  o.f_low = 9000;
  EXPECT_THROW(o.Validate(), VadError);
  o = FeatureOptions::Mfcc();
  o.num_filters = 0;
  EXPECT_THROW(o.Validate(), VadError);
  o = FeatureOptions::Mfcc();
  o.fft_size = 256;
  EXPECT_THROW(o.Validate(), VadError);
  EXPECT_NO_THROW(FeatureOptions::Gfcc(31).Validate());
}

}  // namespace
}  // namespace vadkit

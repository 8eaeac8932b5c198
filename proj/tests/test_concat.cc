// vadkit/test_concat.cc

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

#include "test_util.h"
#include "vadkit/concat.h"

namespace vadkit {
namespace {

Utterance MakeUtt(const std::string& id, int64_t n, float value) {
  Utterance u;
  u.id = id;
  u.samples.assign(static_cast<size_t>(n), value);
  return u;
}

FrameLabels RandomLabels(int64_t samples, std::mt19937_64& rng) {
  FrameLabels l;
  const int64_t frames = NumFrames(samples, FrameParams());
  std::bernoulli_distribution flip(0.05);
  uint8_t cur = 1;
  for (int64_t i = 0; i < frames; ++i) {
    if (flip(rng)) cur ^= 1;
    l.labels.push_back(cur);
  }
  return l;
}

SilencePool ConstantPool(float v, int n) {
  std::vector<std::vector<float>> seg = {std::vector<float>(static_cast<size_t>(n), v)};
  return SilencePool(seg);
}

TEST(PairUtterances, TableOneCount) {
  std::vector<std::string> ids(28535);
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(100000 + i);
  EXPECT_EQ(PairUtterances(ids).size(), 14267u);
}

TEST(PairUtterances, ConsecutivePairs) {
  const auto p = PairUtterances({"a", "b", "c", "d"});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], std::make_pair(std::string("a"), std::string("b")));
  EXPECT_EQ(p[1], std::make_pair(std::string("c"), std::string("d")));
  EXPECT_TRUE(PairUtterances({"a"}).empty());
  EXPECT_TRUE(PairUtterances({}).empty());
  const auto odd = PairUtterances({"a", "b", "c"});
  ASSERT_EQ(odd.size(), 1u);
  EXPECT_EQ(odd[0].second, "b");
}

TEST(InsertedSamples, QuarterOfCombinedLength) {
  EXPECT_EQ(InsertedSamples(160000, 160000, ConcatSpec()), 80000);
  EXPECT_EQ(InsertedSamples(3, 4, ConcatSpec()), 2);  // 1.75 rounds to 2
  ConcatSpec bad;
  bad.silence_ratio = -0.1;
  EXPECT_THROW(InsertedSamples(1, 1, bad), VadError);
}

TEST(InsertedSamples, MeanConcatLengthFromTableOne) {
  // Two 12.71 s utterances plus 25% inserted silence.
  const double total = 2 * 12.71 * 1.25;
  EXPECT_NEAR(total, 31.72, 0.1);
}

TEST(BuildConcat, TenPlusTenSeconds) {
  const auto u1 = MakeUtt("a", 160000, 0.5f), u2 = MakeUtt("b", 160000, -0.5f);
  FrameLabels l1, l2;
  l1.labels.assign(static_cast<size_t>(NumFrames(160000, FrameParams())), 1);
  l2.labels = l1.labels;
  auto pool = ConstantPool(0.0f, 1000);
  const auto r = BuildConcat(u1, u2, l1, l2, pool);
  EXPECT_EQ(r.inserted_samples, 80000);
  EXPECT_EQ(r.utterance.samples.size(), 400000u);
  EXPECT_DOUBLE_EQ(r.utterance.Duration(), 25.0);
  EXPECT_EQ(r.utterance.id, "a_b");
  EXPECT_EQ(r.utterance.samples[159999], 0.5f);
  EXPECT_EQ(r.utterance.samples[160000], 0.0f);
  EXPECT_EQ(r.utterance.samples[239999], 0.0f);
  EXPECT_EQ(r.utterance.samples[240000], -0.5f);
  EXPECT_EQ(static_cast<int64_t>(r.labels.size()), NumFrames(400000, FrameParams()));
}

TEST(BuildConcat, LabelsFollowNearestSourceFrame) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int64_t> len(8000, 60000);
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t n1 = len(rng), n2 = len(rng);
    const auto u1 = MakeUtt("a", n1, 0.1f), u2 = MakeUtt("b", n2, 0.2f);
    const auto l1 = RandomLabels(n1, rng), l2 = RandomLabels(n2, rng);
    auto pool = ConstantPool(0.0f, 777);
    const auto r = BuildConcat(u1, u2, l1, l2, pool);
    const int64_t n = r.inserted_samples;
    // Oracle: brute-force nearest center, ties to the later frame.
    auto nearest = [](const FrameLabels& l, int64_t pos) {
      int64_t best = 0;
      for (int64_t j = 0; j < static_cast<int64_t>(l.size()); ++j) {
        if (std::llabs(j * 160 + 200 - pos) <= std::llabs(best * 160 + 200 - pos)) best = j;
      }
      return l.labels[static_cast<size_t>(best)];
    };
    for (size_t i = 0; i < r.labels.size(); ++i) {
      const int64_t c = static_cast<int64_t>(i) * 160 + 200;
      uint8_t want = 0;
      if (c < n1) want = nearest(l1, c);
      if (c >= n1 + n) want = nearest(l2, c - n1 - n);
      ASSERT_EQ(r.labels.labels[i], want) << trial << " frame " << i;
    }
  }
}

TEST(BuildConcat, SilenceRelationPerOutput) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int64_t> len(16000, 200000);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t n1 = len(rng), n2 = len(rng);
    const auto l1 = RandomLabels(n1, rng), l2 = RandomLabels(n2, rng);
    auto pool = ConstantPool(0.0f, 5000);
    const auto r = BuildConcat(MakeUtt("a", n1, 0), MakeUtt("b", n2, 0), l1, l2, pool);
    const double speech = static_cast<double>(l1.NumSpeech() + l2.NumSpeech());
    const double f = 1.0 - speech / static_cast<double>(l1.size() + l2.size());
    const double want = (f + 0.25) / 1.25;
    const double got = ComputeSsrStats(r.labels).ssr;
    EXPECT_NEAR(got, want, 4.0 / static_cast<double>(r.labels.size())) << trial;
  }
}

TEST(BuildConcat, ConsumesPoolSequentially) {
  std::vector<std::vector<float>> seg(1);
  for (int i = 0; i < 10; ++i) seg[0].push_back(static_cast<float>(i) / 10.0f);
  SilencePool pool(seg);
  const auto u = MakeUtt("a", 16, 1.0f);
  FrameLabels l;
  const auto r1 = BuildConcat(u, u, l, l, pool);  // 8 samples
  const auto r2 = BuildConcat(u, u, l, l, pool);
  EXPECT_EQ(r1.pool_cursor, 0);
  EXPECT_EQ(r2.pool_cursor, 8);
  EXPECT_FLOAT_EQ(r2.utterance.samples[16], 0.8f);
  EXPECT_FLOAT_EQ(r2.utterance.samples[18], 0.0f);
}

TEST(BuildConcat, EmptyPoolAndRateMismatchAreErrors) {
  const auto u = MakeUtt("a", 1600, 0.1f);
  FrameLabels l;
  l.labels.assign(static_cast<size_t>(NumFrames(1600, FrameParams())), 1);
  SilencePool empty;
  EXPECT_THROW(BuildConcat(u, u, l, l, empty), VadError);
  auto u8 = u;
  u8.sample_rate = 8000;
  auto pool = ConstantPool(0.0f, 10);
  EXPECT_THROW(BuildConcat(u, u8, l, l, pool), VadError);
}

TEST(SpeakerOf, LeadingField) {
  EXPECT_EQ(SpeakerOf("19-198-0001"), "19");
  EXPECT_EQ(SpeakerOf("plain"), "plain");
}

}  // namespace
}  // namespace vadkit

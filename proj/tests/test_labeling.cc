// vadkit/test_labeling.cc

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

#include <random>

#include "test_util.h"
#include "vadkit/labeling.h"

namespace vadkit {
namespace {

using Words = std::vector<std::pair<double, double>>;

TEST(MakeTrack, FillsPauses) {
  const Words w = {{0.5, 1.0}, {1.2, 2.0}};
  const auto t = MakeTrack("u", 2.5, w);
  ASSERT_EQ(t.intervals.size(), 5u);
  const std::vector<std::tuple<double, double, IntervalKind>> want = {
      {0.0, 0.5, IntervalKind::kPause}, {0.5, 1.0, IntervalKind::kWord},
      {1.0, 1.2, IntervalKind::kPause}, {1.2, 2.0, IntervalKind::kWord},
      {2.0, 2.5, IntervalKind::kPause}};
  for (size_t i = 0; i < want.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.intervals[i].start, std::get<0>(want[i]));
    EXPECT_DOUBLE_EQ(t.intervals[i].end, std::get<1>(want[i]));
    EXPECT_EQ(t.intervals[i].kind, std::get<2>(want[i]));
  }
}

TEST(MakeTrack, EmptyWordListIsOnePause) {
  const auto t = MakeTrack("u", 1.0, Words{});
  ASSERT_EQ(t.intervals.size(), 1u);
  EXPECT_EQ(t.intervals[0].kind, IntervalKind::kPause);
  EXPECT_DOUBLE_EQ(t.intervals[0].end, 1.0);
}

TEST(MakeTrack, EndBeforeStartIsAnError) {
  try {
    MakeTrack("u", 2.0, Words{{1.0, 0.8}}, 7);
    FAIL();
  } catch (const VadError& e) {
    EXPECT_NE(std::string(e.what()).find("end before start"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(MakeTrack, OverlapAndNegativeTimesAreErrors) {
  EXPECT_THROW(MakeTrack("u", 2.0, Words{{0.1, 0.6}, {0.5, 0.9}}), VadError);
  EXPECT_THROW(MakeTrack("u", 2.0, Words{{-0.1, 0.6}}), VadError);
}

TEST(MakeTrack, SnapsGapsWithinTolerance) {
  const auto t = MakeTrack("u", 1.0, Words{{0.0005, 0.5}, {0.5004, 0.9995}});
  ASSERT_EQ(t.intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(t.intervals[0].start, 0.0);
  EXPECT_DOUBLE_EQ(t.intervals[1].start, 0.5);
  EXPECT_DOUBLE_EQ(t.intervals[1].end, 1.0);
}

TEST(MakeTrack, IntervalsTileTheUtterance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Words w;
    double t = 0.0;
    std::uniform_real_distribution<double> u(0.01, 0.5);
    while (true) {
      const double s = t + u(rng), e = s + u(rng);
      if (e > 6.0) break;
      w.emplace_back(s, e);
      t = e;
    }
    const auto track = MakeTrack("u", 6.0, w);
    double cursor = 0.0;
    for (const auto& iv : track.intervals) {
      EXPECT_DOUBLE_EQ(iv.start, cursor);
      EXPECT_GT(iv.end, iv.start);
      cursor = iv.end;
    }
    EXPECT_DOUBLE_EQ(cursor, 6.0);
  }
}

TEST(ParseAlignment, JsonRoundTrip) {
  const auto t = ParseAlignment(R"({"id":"a-b-c","words":[[0.5,1.0],[1.2,2.0]],"duration":2.5})");
  EXPECT_EQ(t.utterance_id, "a-b-c");
  EXPECT_EQ(t.Words().size(), 2u);
  const auto back = ParseAlignment(AlignmentToJson(t));
  ASSERT_EQ(back.intervals.size(), t.intervals.size());
  for (size_t i = 0; i < t.intervals.size(); ++i) {
    EXPECT_EQ(back.intervals[i].start, t.intervals[i].start);
    EXPECT_EQ(back.intervals[i].end, t.intervals[i].end);
  }
}

TEST(ParseAlignment, ErrorsNameTheLine) {
  try {
    ParseAlignment(R"({"id":"x","words":[[1.0,0.8]],"duration":2})", 12);
    FAIL();
  } catch (const VadError& e) {
    EXPECT_NE(std::string(e.what()).find("line 12"), std::string::npos);
  }
  EXPECT_THROW(ParseAlignment("{bad", 1), VadError);
  EXPECT_THROW(ParseAlignment(R"({"id":"x","duration":2})", 1), VadError);
}

TEST(ConvertLibriSpeech, EmptyTokensArePauses) {
  const auto t = ConvertLibriSpeechAlignmentLine(
      R"(19-198-0001 ",HELLO,,WORLD," "0.3,0.9,1.1,1.6,2.0")");
  EXPECT_EQ(t.utterance_id, "19-198-0001");
  EXPECT_DOUBLE_EQ(t.duration, 2.0);
  const auto w = t.Words();
  ASSERT_EQ(w.size(), 2u);
  EXPECT_DOUBLE_EQ(w[0].start, 0.3);
  EXPECT_DOUBLE_EQ(w[0].end, 0.9);
  EXPECT_DOUBLE_EQ(w[1].start, 1.1);
  EXPECT_DOUBLE_EQ(w[1].end, 1.6);
  EXPECT_THROW(ConvertLibriSpeechAlignmentLine(R"(x "A,B" "0.3")"), VadError);
}

TEST(LabelsFromTrack, WordFromHalfToOneSecond) {
  // Centers 0.5025 (frame 49) through 0.9925 (frame 98) fall inside the word.
  const auto track = MakeTrack("u", 1.5, Words{{0.5, 1.0}});
  const auto l = LabelsFromTrack(track);
  ASSERT_EQ(l.size(), static_cast<size_t>(NumFrames(24000, FrameParams())));
  for (size_t i = 0; i < l.size(); ++i) {
    EXPECT_EQ(l.IsSpeech(i), i >= 49 && i <= 98) << i;
  }
}

TEST(LabelsFromTrack, MatchesSampleLevelCenterCheck) {
  // Oracle: mark word samples, then read each frame's center sample.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.005, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    Words w;
    double t = 0.0;
    while (true) {
      const double s = t + u(rng), e = s + u(rng);
      if (e > 4.0) break;
      w.emplace_back(s, e);
      t = e;
    }
    const auto track = MakeTrack("u", 4.0, w);
    const auto l = LabelsFromTrack(track);
    std::vector<uint8_t> mask(64000, 0);
    for (size_t k = 0; k < mask.size(); ++k) {
      const double time = static_cast<double>(k) / 16000.0;
      for (const auto& [s, e] : w) {
        if (time >= s && time < e) mask[k] = 1;
      }
    }
    ASSERT_EQ(l.size(), static_cast<size_t>(NumFrames(64000, FrameParams())));
    for (size_t i = 0; i < l.size(); ++i) {
      EXPECT_EQ(l.labels[i], mask[i * 160 + 200]) << trial << " frame " << i;
    }
  }
}

TEST(LabelsFromTrack, AllPauseAndAllWord) {
  EXPECT_EQ(LabelsFromTrack(MakeTrack("u", 1.0, Words{})).NumSpeech(), 0u);
  const auto all = LabelsFromTrack(MakeTrack("u", 1.0, Words{{0.0, 1.0}}));
  EXPECT_EQ(all.NumSpeech(), all.size());
}

TEST(SsrStats, Examples) {
  FrameLabels l;
  l.labels.assign(100, 1);
  EXPECT_DOUBLE_EQ(ComputeSsrStats(l).ssr, 0.0);
  std::fill(l.labels.begin(), l.labels.begin() + 50, 0);
  const auto s = ComputeSsrStats(l);
  EXPECT_DOUBLE_EQ(s.ssr, 0.5);
  EXPECT_NEAR(s.speech_seconds + s.silence_seconds, s.total_seconds, 1e-12);
  EXPECT_THROW(ComputeSsrStats(FrameLabels()), VadError);
}

TEST(SsrStats, CorpusTotalsFromTableOne) {
  // 83.31 h of speech in 100.74 h of audio.
  const double ssr = (100.74 - 83.31) / 100.74;
  EXPECT_NEAR(ssr, 0.176, 0.005);
}

TEST(ExtractSilence, AllSpeechGivesNothing) {
  Utterance u;
  u.samples.assign(16000, 0.1f);
  FrameLabels l;
  l.labels.assign(static_cast<size_t>(NumFrames(16000, FrameParams())), 1);
  EXPECT_TRUE(ExtractSilence(u, l).empty());
}

TEST(ExtractSilence, SpansFrameCentersOfEachRun) {
  Utterance u;
  u.samples.resize(16000);
  for (size_t i = 0; i < u.samples.size(); ++i) u.samples[i] = static_cast<float>(i);
  FrameLabels l;
  l.labels.assign(static_cast<size_t>(NumFrames(16000, FrameParams())), 1);
  for (int i = 20; i < 30; ++i) l.labels[i] = 0;
  for (int i = 60; i < 65; ++i) l.labels[i] = 0;
  const auto s = ExtractSilence(u, l);
  ASSERT_EQ(s.size(), 2u);
  // Run of k frames covers centers first..last inclusive.
  EXPECT_EQ(s[0].size(), 9u * 160 + 1);
  EXPECT_EQ(s[0].front(), 20.0f * 160 + 200);
  EXPECT_EQ(s[1].size(), 4u * 160 + 1);
  const double total = (s[0].size() + s[1].size()) / 16000.0;
  EXPECT_NEAR(total, ComputeSsrStats(l).silence_seconds, 0.025);
}

TEST(ExtractSilence, NeverOverlapsWords) {
  // Words at least one hop long always contain a frame center.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0101, 0.25);
  for (int trial = 0; trial < 100; ++trial) {
    Words w;
    double t = 0.0;
    while (true) {
      const double s = t + u(rng), e = s + u(rng);
      if (e > 3.0) break;
      w.emplace_back(s, e);
      t = e;
    }
    const auto track = MakeTrack("u", 3.0, w);
    const auto l = LabelsFromTrack(track);
    for (const auto& span : SilenceSpans(l, 48000)) {
      for (int64_t k = span.begin; k < span.end; ++k) {
        const double time = static_cast<double>(k) / 16000.0;
        for (const auto& [s, e] : w) ASSERT_FALSE(time >= s && time < e);
      }
    }
  }
}

TEST(ExtractSilence, RejectsMisalignedLabels) {
  Utterance u;
  u.samples.assign(16000, 0.0f);
  FrameLabels l;
  l.labels.assign(10, 0);
  EXPECT_THROW(ExtractSilence(u, l), VadError);
}

std::vector<float> Iota(int n) {
  std::vector<float> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = static_cast<float>(i);
  return v;
}

TEST(SilencePool, SequentialTakes) {
  std::vector<std::vector<float>> seg = {Iota(10)};
  SilencePool pool(seg);
  EXPECT_EQ(pool.Take(4), (std::vector<float>{0, 1, 2, 3}));
  EXPECT_EQ(pool.Take(4), (std::vector<float>{4, 5, 6, 7}));
}

TEST(SilencePool, WrapsAround) {
  std::vector<std::vector<float>> seg = {Iota(4), {4, 5, 6, 7, 8, 9}};
  SilencePool pool(seg);
  pool.Take(8);
  EXPECT_EQ(pool.Take(4), (std::vector<float>{8, 9, 0, 1}));
  EXPECT_EQ(pool.cursor(), 2);
  EXPECT_EQ(pool.Take(25).size(), 25u);
}

TEST(SilencePool, EmptyPoolIsAnError) {
  SilencePool pool;
  EXPECT_THROW(pool.Take(1), VadError);
}

TEST(SilencePool, WithCursorSharesAudio) {
  std::vector<std::vector<float>> seg = {Iota(10)};
  SilencePool pool(seg);
  auto other = pool.WithCursor(13);
  EXPECT_EQ(other.cursor(), 3);
  EXPECT_EQ(other.Take(2), (std::vector<float>{3, 4}));
  EXPECT_EQ(pool.cursor(), 0);
}

}  // namespace
}  // namespace vadkit

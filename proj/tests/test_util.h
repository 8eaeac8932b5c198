// vadkit/test_util.h

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

#ifndef VADKIT_TESTS_TEST_UTIL_H_
#define VADKIT_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vadkit/corpus.h"
#include "vadkit/metrics.h"

namespace vadkit::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("vadkit-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

 private:
  std::filesystem::path path_;
};

/// Scores drawn from a few distinct levels so ties are common.
inline ScoreSet RandomScoreSet(std::mt19937_64& rng, size_t n, int levels = 0) {
  ScoreSet s;
  std::bernoulli_distribution label(0.4);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> level(0, levels > 0 ? levels - 1 : 0);
  for (size_t i = 0; i < n; ++i) {
    const uint8_t y = label(rng) ? 1 : 0;
    double x = levels > 0 ? level(rng) / static_cast<double>(levels) : g(rng);
    if (y && levels == 0) x += 1.0;
    if (y && levels > 0 && std::bernoulli_distribution(0.3)(rng)) x += 0.5;
    s.scores.push_back(x);
    s.labels.push_back(y);
  }
  if (s.NumPositive() == 0) s.labels[0] = 1;
  if (s.NumPositive() == static_cast<int64_t>(n)) s.labels[0] = 0;
  return s;
}

inline std::vector<float> WhiteNoise(size_t n, double rms, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, rms);
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(g(rng));
  return x;
}

/// Bursts of a harmonic tone separated by near-silence; labels mark the bursts.
struct ToneBursts {
  std::vector<float> audio;
  FrameLabels labels;
};

inline ToneBursts MakeToneBursts(double seconds, uint64_t seed, double burst = 0.4,
                                 double gap = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1e-4);
  const auto n = static_cast<int64_t>(seconds * kSampleRate);
  ToneBursts out;
  out.audio.resize(static_cast<size_t>(n));
  std::vector<uint8_t> active(static_cast<size_t>(n), 0);
  const double period = burst + gap;
  for (int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double phase = std::fmod(t, period);
    double v = g(rng);
    if (phase >= gap) {
      active[static_cast<size_t>(i)] = 1;
      v += 0.2 * std::sin(2 * M_PI * 180 * t) + 0.1 * std::sin(2 * M_PI * 540 * t);
    }
    out.audio[static_cast<size_t>(i)] = static_cast<float>(v);
  }
  FrameParams fp;
  const int64_t frames = NumFrames(n, fp);
  for (int64_t f = 0; f < frames; ++f) {
    out.labels.labels.push_back(active[static_cast<size_t>(FrameCenterSample(f, fp))]);
  }
  return out;
}

}  // namespace vadkit::testing

#endif  // VADKIT_TESTS_TEST_UTIL_H_

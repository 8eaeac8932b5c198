// vadkit/concat.cc

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

#include "vadkit/concat.h"

#include <algorithm>
#include <cmath>

namespace vadkit {

namespace {

uint8_t NearestLabel(const FrameLabels& labels, int64_t pos, int rate) {
  if (labels.labels.empty()) return 0;
  const auto& fp = labels.frame_params;
  const double idx = std::floor(
      static_cast<double>(pos - fp.WindowSamples(rate) / 2) / fp.HopSamples(rate) +
      0.5);
  const int64_t i = std::clamp<int64_t>(static_cast<int64_t>(idx), 0,
                                        static_cast<int64_t>(labels.size()) - 1);
  return labels.labels[static_cast<size_t>(i)];
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PairUtterances(
    const std::vector<std::string>& sorted_ids) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i + 1 < sorted_ids.size(); i += 2) {
    pairs.emplace_back(sorted_ids[i], sorted_ids[i + 1]);
  }
  return pairs;
}

int64_t InsertedSamples(int64_t len1, int64_t len2, const ConcatSpec& spec) {
  if (spec.silence_ratio < 0.0) throw VadError("concat: negative silence ratio");
  return std::llround(spec.silence_ratio * static_cast<double>(len1 + len2));
}

ConcatResult BuildConcat(const Utterance& u1, const Utterance& u2,
                         const FrameLabels& labels1, const FrameLabels& labels2,
                         SilencePool& pool, const ConcatSpec& spec) {
  if (u1.sample_rate != u2.sample_rate) {
    throw VadError("concat: sample rates differ (" + u1.id + ", " + u2.id + ")");
  }
  if (!(labels1.frame_params == labels2.frame_params)) {
    throw VadError("concat: frame parameters differ");
  }
  const int rate = u1.sample_rate;
  const int64_t len1 = static_cast<int64_t>(u1.samples.size());
  const int64_t len2 = static_cast<int64_t>(u2.samples.size());
  const int64_t n = InsertedSamples(len1, len2, spec);

  ConcatResult result;
  result.inserted_samples = n;
  result.pool_cursor = pool.cursor();
  auto silence = pool.Take(n);

  Utterance& out = result.utterance;
  out.id = u1.id + "_" + u2.id;
  out.sample_rate = rate;
  out.samples.reserve(static_cast<size_t>(len1 + n + len2));
  out.samples.insert(out.samples.end(), u1.samples.begin(), u1.samples.end());
  out.samples.insert(out.samples.end(), silence.begin(), silence.end());
  out.samples.insert(out.samples.end(), u2.samples.begin(), u2.samples.end());

  const FrameParams& fp = labels1.frame_params;
  const int64_t frames = NumFrames(static_cast<int64_t>(out.samples.size()), fp, rate);
  result.labels.frame_params = fp;
  result.labels.labels.resize(static_cast<size_t>(frames));
  for (int64_t i = 0; i < frames; ++i) {
    const int64_t c = FrameCenterSample(i, fp, rate);
    uint8_t l = 0;
    if (c < len1) {
      l = NearestLabel(labels1, c, rate);
    } else if (c >= len1 + n) {
      l = NearestLabel(labels2, c - len1 - n, rate);
    }
    result.labels.labels[static_cast<size_t>(i)] = l;
  }
  return result;
}

std::string SpeakerOf(const std::string& utterance_id) {
  const auto dash = utterance_id.find('-');
  return dash == std::string::npos ? utterance_id : utterance_id.substr(0, dash);
}

}  // namespace vadkit

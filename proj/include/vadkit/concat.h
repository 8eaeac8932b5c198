// vadkit/concat.h

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

// Concat corpus construction: consecutive utterances joined by calibrated
// silence drawn from a SilencePool.

#ifndef VADKIT_CONCAT_H_
#define VADKIT_CONCAT_H_

#include <string>
#include <utility>
#include <vector>

#include "vadkit/corpus.h"
#include "vadkit/labeling.h"

namespace vadkit {

struct ConcatSpec {
  double silence_ratio = 0.25;  // inserted / (len1 + len2)
};

/// (0,1), (2,3), ...; an odd trailing id is dropped.
std::vector<std::pair<std::string, std::string>> PairUtterances(
    const std::vector<std::string>& sorted_ids);

/// Samples inserted between two utterances of the given lengths.
int64_t InsertedSamples(int64_t len1, int64_t len2, const ConcatSpec& spec);

struct ConcatResult {
  Utterance utterance;
  FrameLabels labels;
  int64_t inserted_samples = 0;
  int64_t pool_cursor = 0;  // cursor before the take
};

/// u1 ++ silence ++ u2. Labels are rebuilt on the joined timeline: frames
/// whose centre falls in u1 or u2 copy the nearest-centre source label,
/// frames centred in the inserted span are nonspeech.
ConcatResult BuildConcat(const Utterance& u1, const Utterance& u2,
                         const FrameLabels& labels1, const FrameLabels& labels2,
                         SilencePool& pool, const ConcatSpec& spec = ConcatSpec());

/// Speaker id is the leading token of a LibriSpeech-style id (`19-198-0001`).
std::string SpeakerOf(const std::string& utterance_id);

}  // namespace vadkit

#endif  // VADKIT_CONCAT_H_

// vadkit/labeling.h

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

// Forced-alignment word intervals -> frame-level VAD labels, silence
// statistics, and the pooled silence signal used for Concat insertion.

#ifndef VADKIT_LABELING_H_
#define VADKIT_LABELING_H_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

enum class IntervalKind { kWord, kPause };

struct Interval {
  double start = 0.0;
  double end = 0.0;
  IntervalKind kind = IntervalKind::kWord;
};

/// Sorted, non-overlapping intervals covering [0, duration] exactly.
struct AlignmentTrack {
  std::string utterance_id;
  double duration = 0.0;
  std::vector<Interval> intervals;

  std::vector<Interval> Words() const;
};

/// Coverage tolerance when validating aligner output.
inline constexpr double kAlignmentGapTolerance = 0.001;

/// Normalises a word list into a full track with explicit pauses. Word
/// boundaries closer than the tolerance are snapped together.
AlignmentTrack MakeTrack(std::string utterance_id, double duration,
                         std::span<const std::pair<double, double>> words,
                         int line_number = 0);

/// One JSONL object: {"id":..., "words":[[start,end],...], "duration":...}.
AlignmentTrack ParseAlignment(std::string_view json_line, int line_number = 0);
std::string AlignmentToJson(const AlignmentTrack& track);
std::vector<AlignmentTrack> ReadAlignmentFile(const std::string& path);

/// Converts one line of the LibriSpeech-alignments release
/// (`<id> ",W1,,W2," "t1,t2,..."`, empty words are silences, times are
/// interval ends) into the JSONL interchange object.
AlignmentTrack ConvertLibriSpeechAlignmentLine(std::string_view line,
                                               int line_number = 0);

/// Frame i is speech iff its centre time lies inside a word interval.
FrameLabels LabelsFromTrack(const AlignmentTrack& track,
                            const FrameParams& fp = FrameParams(),
                            int64_t num_samples = -1, int rate = kSampleRate);

SsrStats ComputeSsrStats(const FrameLabels& labels);

struct SampleSpan {
  int64_t begin = 0;
  int64_t end = 0;  // exclusive
  int64_t size() const { return end - begin; }
};

/// Sample spans of the maximal nonspeech runs. A run of frames a..b maps to
/// the samples between the first and last frame centres, inclusive, so no
/// extracted sample belongs to a word that is at least one hop long.
std::vector<SampleSpan> SilenceSpans(const FrameLabels& labels,
                                     int64_t num_samples,
                                     int rate = kSampleRate);

std::vector<std::vector<float>> ExtractSilence(const Utterance& utt,
                                               const FrameLabels& labels);

/// The concatenation of extracted silence, consumed sequentially with
/// wrap-around. Copies share the underlying audio; each copy has its own
/// cursor, so a pool must not be shared between workers.
class SilencePool {
 public:
  SilencePool() = default;
  explicit SilencePool(std::span<const std::vector<float>> segments);

  /// A pool over the same audio starting at `cursor` (mod size).
  SilencePool WithCursor(int64_t cursor) const;

  std::vector<float> Take(int64_t n);

  int64_t size() const { return audio_ ? static_cast<int64_t>(audio_->size()) : 0; }
  int64_t cursor() const { return cursor_; }
  bool empty() const { return size() == 0; }

 private:
  std::shared_ptr<const std::vector<float>> audio_;
  int64_t cursor_ = 0;
};

}  // namespace vadkit

#endif  // VADKIT_LABELING_H_

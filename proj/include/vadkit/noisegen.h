// vadkit/noisegen.h

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

// Synthetic noise sources: speech-shaped noise from a long-term LPC fit,
// multi-talker babble from silence-stripped speech streams, the source
// speaker screening both rely on, and assembly of train/val/test splits.

#ifndef VADKIT_NOISEGEN_H_
#define VADKIT_NOISEGEN_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

/// All-pole filter gain / A(z), A(z) = 1 + sum_k a[k-1] z^-k.
struct LpcFilter {
  int order = 0;
  std::vector<double> a;
  std::vector<double> reflection;  // from Levinson-Durbin, |k_i| < 1 if stable
  double gain = 1.0;
};

struct LpcOptions {
  double frame_seconds = 0.030;  // Hamming analysis frames
  double hop_seconds = 0.015;
};

/// Autocorrelation lags 0..max_lag of Hamming-windowed frames, averaged over
/// frames and normalised by the window energy (so lag 0 is the mean power).
/// Per-frame lags are computed in parallel and reduced in frame order.
std::vector<double> AveragedAutocorrelation(std::span<const float> audio,
                                            int max_lag,
                                            const LpcOptions& opts = LpcOptions(),
                                            int rate = kSampleRate);
std::vector<double> AveragedAutocorrelationSerial(
    std::span<const float> audio, int max_lag,
    const LpcOptions& opts = LpcOptions(), int rate = kSampleRate);

struct LevinsonResult {
  std::vector<double> a;
  std::vector<double> reflection;
  double error = 0.0;  // final prediction error power
};

/// Solves the Toeplitz normal equations for r[0..order].
LevinsonResult LevinsonDurbin(std::span<const double> r, int order);

/// Throws on zero-energy input or an unstable result.
LpcFilter LpcFit(std::span<const float> audio, int order,
                 const LpcOptions& opts = LpcOptions(), int rate = kSampleRate);

bool IsStable(const LpcFilter& filter);

inline constexpr double kNoiseRms = 0.1;

/// Seeded Gaussian white noise through gain / A(z), RMS-normalised to
/// kNoiseRms.
std::vector<float> SynthSsn(const LpcFilter& filter, double duration_seconds,
                            uint64_t seed, int rate = kSampleRate);

struct EnergyVadOptions {
  double percentile = 0.20;
  double margin_db = 6.0;
  double absolute_floor_db = -60.0;  // frames quieter than this are never speech
  double min_gap_seconds = 0.100;    // shorter nonspeech gaps are closed
  double min_speech_seconds = 0.050; // shorter speech runs are dropped
};

/// Percentile log-energy VAD with run-length smoothing. When the frame
/// energies span less than the margin the signal is treated as one class.
FrameLabels EnergyVad(std::span<const float> audio,
                      const FrameParams& fp = FrameParams(),
                      const EnergyVadOptions& opts = EnergyVadOptions(),
                      int rate = kSampleRate);

/// 10 log10(mean speech-frame power / mean nonspeech-frame power).
double EstSnr(std::span<const float> audio, const FrameLabels& labels,
              int rate = kSampleRate);

/// Keeps the hop-centred sample span of every speech frame.
std::vector<float> RemoveSilence(std::span<const float> audio,
                                 const FrameLabels& labels, int rate = kSampleRate);

struct SpeakerAudio {
  std::string speaker_id;
  std::vector<Utterance> utterances;
};

struct SelectionCriteria {
  double min_snr_db = 15.0;
  double min_speech_fraction = 0.90;
  double min_speech_seconds = 600.0;
};

struct SpeakerSelection {
  std::string speaker_id;
  double est_snr_db = 0.0;
  double speech_fraction = 0.0;
  double speech_seconds = 0.0;
  bool accepted = false;
  std::vector<std::string> kept_utterances;
};

/// Per-utterance screening (SNR and speech fraction), then speaker totals over
/// the kept utterances.
SpeakerSelection EvaluateSpeaker(const SpeakerAudio& speaker,
                                 const SelectionCriteria& criteria = SelectionCriteria(),
                                 const FrameParams& fp = FrameParams());

/// Accepted speakers only, sorted by id.
std::vector<SpeakerSelection> SelectSpeakers(
    std::span<const SpeakerAudio> speakers,
    const SelectionCriteria& criteria = SelectionCriteria(),
    const FrameParams& fp = FrameParams());

struct BabbleConfig {
  int num_streams = 6;
  std::map<std::string, int> assignment;  // speaker -> stream; empty = seeded
};

struct BabbleResult {
  std::vector<float> audio;
  double pre_norm_rms = 0.0;
  std::map<std::string, int> assignment;
  std::vector<std::vector<std::string>> stream_utterances;
};

/// Speakers' utterances are expected to be silence-removed already.
BabbleResult BuildBabble(std::span<const SpeakerAudio> speakers,
                         const BabbleConfig& config, uint64_t seed);

struct SplitAllocation {
  int sources = 0;
  double seconds_each = 0.0;
};

struct SsnSplitPlan {
  SplitAllocation train{18, 200.0};
  SplitAllocation val{2, 300.0};
  SplitAllocation test{2, 300.0};

  const SplitAllocation& For(Split split) const;
  int TotalSources() const { return train.sources + val.sources + test.sources; }
};

struct NoiseProvenance {
  NoiseType type = NoiseType::kSsn;
  Split split = Split::kTrain;
  std::vector<std::string> sources;
  double seconds = 0.0;
  uint64_t seed = 0;
};

std::string ProvenanceToJson(const NoiseProvenance& p);

struct SplitAudio {
  std::vector<float> audio;
  NoiseProvenance provenance;
};

/// Filters are consumed in order: train first, then val, then test.
std::map<Split, SplitAudio> AssembleSsnSplits(
    std::span<const LpcFilter> filters, std::span<const std::string> filter_ids,
    const SsnSplitPlan& plan, uint64_t seed, int rate = kSampleRate);

struct DurationPlan {
  double train = 3 * 3600.0;
  double val = 1800.0;
  double test = 1800.0;

  double For(Split split) const;
};

/// Concatenates recordings in order and truncates to `seconds`.
std::vector<float> ConcatenateToDuration(std::span<const std::vector<float>> recordings,
                                         double seconds, int rate = kSampleRate);

struct BabbleSplitPlan {
  int train_speakers = 6;
  int val_speakers = 6;
  int test_speakers = 6;
  DurationPlan durations;
};

/// Speakers are partitioned in order into the three splits.
std::map<Split, SplitAudio> AssembleBabbleSplits(
    std::span<const SpeakerAudio> speakers, const BabbleSplitPlan& plan,
    uint64_t seed, int rate = kSampleRate);

double Rms(std::span<const float> x);

}  // namespace vadkit

#endif  // VADKIT_NOISEGEN_H_

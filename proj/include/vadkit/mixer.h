// vadkit/mixer.h

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

// Mixing clean speech with noise at a target SNR measured over the
// speech-active region, stride subsampling, and full dataset generation.

#ifndef VADKIT_MIXER_H_
#define VADKIT_MIXER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

/// 1 for every sample covered by at least one speech-labelled frame window.
std::vector<uint8_t> SpeechActiveMask(const FrameLabels& labels, int64_t num_samples,
                                      int rate = kSampleRate);

/// 10 log10(mean power of speech-active samples / mean power of the whole
/// noise slice).
double ActiveSnr(std::span<const float> speech, const FrameLabels& labels,
                 std::span<const float> noise_slice, int rate = kSampleRate);

/// Cyclic tiling of `noise` starting at `offset`.
std::vector<float> TileNoise(std::span<const float> noise, int64_t offset, int64_t length);

struct MixResult {
  std::vector<float> audio;
  double achieved_snr_db = 0.0;
  double noise_scale = 0.0;
  double peak_after_mix = 0.0;  // before any attenuation
  double output_gain = 1.0;     // 1/peak when the mix exceeded full scale
  bool clipped = false;         // always false: attenuation replaces clipping
  int64_t noise_offset = 0;
};

/// Noise offset drawn uniformly from [0, len(noise)) using `seed`.
int64_t DrawNoiseOffset(uint64_t seed, int64_t noise_len);

MixResult MixAtSnr(std::span<const float> speech, const FrameLabels& labels,
                   std::span<const float> noise, double target_db, uint64_t seed,
                   int rate = kSampleRate);

/// Keeps indices 0, stride, 2*stride, ... of an already-sorted list.
template <typename T>
std::vector<T> Subsample(const std::vector<T>& sorted, int64_t stride) {
  if (stride < 1) throw VadError("subsample: stride must be >= 1");
  std::vector<T> out;
  out.reserve(sorted.size() / static_cast<size_t>(stride) + 1);
  for (size_t i = 0; i < sorted.size(); i += static_cast<size_t>(stride)) {
    out.push_back(sorted[i]);
  }
  return out;
}

struct CleanItem {
  std::string id;
  Split split = Split::kTrain;
  std::string audio_path;
  FrameLabels labels;
};

struct NoiseSource {
  NoiseType type = NoiseType::kNature;
  Split split = Split::kTrain;
  std::vector<float> audio;
};

struct DatasetConfig {
  std::vector<int> snr_levels{kSnrLevels.begin(), kSnrLevels.end()};
  std::vector<NoiseType> noise_types{kAllNoiseTypes.begin(), kAllNoiseTypes.end()};
  uint64_t master_seed = 0;
  std::string out_dir;
  bool resume = false;
  int workers = 0;  // 0 = OpenMP default
  /// Called once per written entry with its wall time; serialised.
  std::function<void(const ManifestEntry&, double seconds)> on_entry;
};

struct EntryError {
  std::string output_path;
  std::string message;
};

struct DatasetResult {
  std::vector<ManifestEntry> entries;  // planned order
  std::vector<EntryError> errors;
  int64_t written = 0;
  int64_t skipped = 0;
};

/// Seed key of one mixture, also the basis of its relative output path.
std::string EntryKey(Split split, NoiseType type, int snr_db, const std::string& clean_id);

/// Writes `<out>/<split>/<noise>/<snr>/<id>.{wav,lab}` for the full cross
/// product and `<out>/manifest.jsonl` in planned order. Paths in the
/// manifest are relative to out_dir. Each utterance is an independent job;
/// completed entries are journalled so an interrupted run can resume.
DatasetResult GenerateDataset(std::span<const CleanItem> clean,
                              std::span<const NoiseSource> noises,
                              const DatasetConfig& config);

/// Re-derives the noise component of a written entry from the manifest
/// record and returns the SNR of the stored mixture against it.
double VerifyEntrySnr(const ManifestEntry& entry, const std::string& out_dir,
                      std::span<const float> noise, const FrameLabels& labels);

}  // namespace vadkit

#endif  // VADKIT_MIXER_H_

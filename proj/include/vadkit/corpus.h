// vadkit/corpus.h

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

// Shared domain types for corpus synthesis: utterances, framing, frame
// labels, manifest entries, and the seeding rule every generator uses.

#ifndef VADKIT_CORPUS_H_
#define VADKIT_CORPUS_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vadkit {

/// All library errors are reported with this exception type.
class VadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSampleRate = 16000;

enum class NoiseType {
  kNature,
  kOffice,
  kPublic,
  kStreet,
  kTransport,
  kCity,
  kBabble,
  kSsn,
  kDomestic,
};

/// Column order used by the result tables: six seen types, then the unseen.
inline constexpr std::array<NoiseType, 9> kAllNoiseTypes = {
    NoiseType::kNature,    NoiseType::kOffice, NoiseType::kPublic,
    NoiseType::kStreet,    NoiseType::kTransport, NoiseType::kCity,
    NoiseType::kBabble,    NoiseType::kSsn,    NoiseType::kDomestic};

inline constexpr std::array<int, 6> kSnrLevels = {-5, 0, 5, 10, 15, 20};

std::string_view NoiseTypeName(NoiseType type);
std::optional<NoiseType> ParseNoiseType(std::string_view name);
bool IsSeenNoise(NoiseType type);
bool IsValidSnrLevel(int snr_db);

enum class Split { kTrain, kVal, kTest };

inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kVal,
                                                    Split::kTest};

std::string_view SplitName(Split split);
std::optional<Split> ParseSplit(std::string_view name);

struct Utterance {
  std::string id;
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  double Duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws if the rate is not positive or any sample is non-finite.
void ValidateUtterance(const Utterance& utt);

struct FrameParams {
  double window = 0.025;
  double hop = 0.010;

  int WindowSamples(int rate = kSampleRate) const;
  int HopSamples(int rate = kSampleRate) const;
  void Validate() const;

  bool operator==(const FrameParams&) const = default;
};

/// 1 + floor((len - window) / hop); zero when the signal is shorter than one
/// window (the degenerate case).
int64_t NumFrames(int64_t signal_len, const FrameParams& fp,
                  int rate = kSampleRate);

/// Sample index of the centre of frame `i`.
int64_t FrameCenterSample(int64_t i, const FrameParams& fp,
                          int rate = kSampleRate);

enum class Label : uint8_t { kNonSpeech = 0, kSpeech = 1 };

struct FrameLabels {
  std::vector<uint8_t> labels;  // 1 = speech
  FrameParams frame_params;

  size_t size() const { return labels.size(); }
  bool IsSpeech(size_t i) const { return labels[i] != 0; }
  size_t NumSpeech() const;

  bool operator==(const FrameLabels&) const = default;
};

struct SsrStats {
  double speech_seconds = 0.0;
  double silence_seconds = 0.0;
  double total_seconds = 0.0;
  double ssr = 0.0;  // silence / total
};

struct ManifestEntry {
  std::string clean_id;
  NoiseType noise_type = NoiseType::kNature;
  int snr_db = 0;
  Split split = Split::kTrain;
  int64_t noise_offset = 0;
  uint64_t seed = 0;
  std::string output_path;
  std::string label_path;
  // Recorded so the noise component can be regenerated from the manifest.
  double noise_scale = 0.0;
  double output_gain = 1.0;
  double achieved_snr_db = 0.0;

  bool operator==(const ManifestEntry&) const = default;
};

/// Throws VadError naming the bad field.
void ValidateManifestEntry(const ManifestEntry& entry);

std::string ManifestEntryToJson(const ManifestEntry& entry);
ManifestEntry ManifestEntryFromJson(std::string_view line);

void WriteManifest(std::ostream& os, std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> ReadManifest(std::istream& is);
std::vector<ManifestEntry> ReadManifestFile(const std::string& path);
void WriteManifestFile(const std::string& path,
                       std::span<const ManifestEntry> entries);

/// Stable 64-bit identity hash of `entry_id` mixed with `master_seed`.
uint64_t DeriveSeed(uint64_t master_seed, std::string_view entry_id);

/// Label line: `<utterance_id> <one 0/1 char per frame>`.
std::string FormatLabelLine(std::string_view utt_id, const FrameLabels& labels);
std::pair<std::string, FrameLabels> ParseLabelLine(
    std::string_view line, const FrameParams& fp = FrameParams());

struct LabeledId {
  std::string id;
  FrameLabels labels;
};

void WriteLabelFile(const std::string& path, std::span<const LabeledId> items);
std::vector<LabeledId> ReadLabelFile(const std::string& path,
                                     const FrameParams& fp = FrameParams());

/// Writes via a temporary sibling and rename so readers never see partial
/// files.
void WriteFileAtomic(const std::string& path, std::string_view contents);
std::string ReadFileToString(const std::string& path);

}  // namespace vadkit

#endif  // VADKIT_CORPUS_H_

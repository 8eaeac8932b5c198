// vadkit/fixture_synth.h

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

// Procedural stand-ins for the corpora the pipeline consumes: source-filter
// "speech" with exact word alignments, screened noise-source speakers, and
// environmental noise textures for the recorded noise types.

#ifndef VADKIT_FIXTURE_SYNTH_H_
#define VADKIT_FIXTURE_SYNTH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vadkit/corpus.h"
#include "vadkit/labeling.h"

namespace vadkit::fixture {

struct Voice {
  double f0 = 120.0;
  double formant_scale = 1.0;
  double level = 0.08;  // vowel RMS
};

Voice VoiceForSpeaker(const std::string& speaker_id, uint64_t seed);

struct PauseStyle {
  double edge_min = 0.05, edge_max = 0.14;  // leading / trailing silence
  double short_min = 0.02, short_max = 0.05;
  double long_min = 0.10, long_max = 0.22;
  double long_prob = 0.15;
  int max_syllables = 3;  // per word
};

/// Pauses for speech-rich source speakers (speech fraction well above 0.9).
PauseStyle DensePauses();

struct SyntheticUtterance {
  Utterance utterance;
  AlignmentTrack track;
};

/// About the given duration of speech-like audio with a -60 dBFS noise floor.
SyntheticUtterance SynthUtterance(const std::string& id, const Voice& voice,
                                  double seconds, const PauseStyle& pauses, uint64_t seed);

/// Unit-agnostic texture for one of the recorded noise types (not Babble/SSN).
std::vector<float> SynthEnvironmentalNoise(NoiseType type, double seconds, uint64_t seed);

struct FixtureLayout {
  int speakers = 5;
  int utterances_per_speaker = 4;
  double utterance_seconds = 3.2;  // target before the trailing edge silence
  int source_speakers = 18;
  int source_utterances = 10;
  double source_seconds = 4.0;
  double recording_seconds = 20.0;  // per recorded-noise file
  int recordings_per_split = 2;
};

/// Writes clean/<split>/*.wav and alignments.jsonl under `dir`. The first
/// three speakers are train, then one val and one test speaker.
void WriteCleanCorpus(const std::string& dir, const FixtureLayout& layout, uint64_t seed);

/// Writes speakers/<spk>/*.wav and recordings/<Type>/<split>/*.wav.
void WriteNoiseSources(const std::string& dir, const FixtureLayout& layout, uint64_t seed);

/// LibriSpeech-alignment style lines for the clean corpus tracks.
std::string LibriSpeechAlignmentLine(const AlignmentTrack& track);

}  // namespace vadkit::fixture

#endif  // VADKIT_FIXTURE_SYNTH_H_

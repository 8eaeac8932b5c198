// vadkit/audio_io.h

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

#ifndef VADKIT_AUDIO_IO_H_
#define VADKIT_AUDIO_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

/// Decodes a mono 16 kHz WAV or FLAC file. Other rates and multi-channel
/// input are rejected. The utterance id is the file stem.
Utterance ReadAudio(const std::string& path);

/// Saturating float -> s16 conversion (no dither).
int16_t FloatToPcm16(float x);
inline float Pcm16ToFloat(int16_t s) { return static_cast<float>(s) / 32768.0f; }

/// RIFF/WAVE, PCM s16le, mono.
std::string EncodeWav(std::span<const float> samples, int rate = kSampleRate);
void WriteWav(const std::string& path, std::span<const float> samples,
              int rate = kSampleRate);

/// Values as they will read back after a write: s16 quantisation applied.
std::vector<float> QuantizePcm16(std::span<const float> samples);

}  // namespace vadkit

#endif  // VADKIT_AUDIO_IO_H_

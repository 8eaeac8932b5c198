// vadkit/audio_io.cc

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

#include "vadkit/audio_io.h"

#include <cmath>
#include <filesystem>

#include "miniaudio.h"

namespace vadkit {

namespace {

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Utterance ReadAudio(const std::string& path) {
  ma_decoder_config config = ma_decoder_config_init(ma_format_s16, 0, 0);
  ma_decoder decoder;
  if (ma_decoder_init_file(path.c_str(), &config, &decoder) != MA_SUCCESS) {
    throw VadError("cannot decode audio file " + path);
  }
  struct Closer {
    ma_decoder* d;
    ~Closer() { ma_decoder_uninit(d); }
  } closer{&decoder};

  if (decoder.outputChannels != 1) {
    throw VadError(path + ": expected mono audio, got " +
                   std::to_string(decoder.outputChannels) + " channels");
  }
  if (decoder.outputSampleRate != static_cast<ma_uint32>(kSampleRate)) {
    throw VadError(path + ": sample rate " +
                   std::to_string(decoder.outputSampleRate) +
                   " Hz is not 16000 Hz (resampling is not supported)");
  }

  Utterance utt;
  utt.id = std::filesystem::path(path).stem().string();
  utt.sample_rate = kSampleRate;
  std::vector<int16_t> chunk(1 << 14);
  for (;;) {
    ma_uint64 read = 0;
    ma_result r = ma_decoder_read_pcm_frames(&decoder, chunk.data(),
                                             chunk.size(), &read);
    for (ma_uint64 i = 0; i < read; ++i) {
      utt.samples.push_back(Pcm16ToFloat(chunk[i]));
    }
    if (r == MA_AT_END || read == 0) break;
    if (r != MA_SUCCESS) throw VadError(path + ": decode error");
  }
  return utt;
}

int16_t FloatToPcm16(float x) {
  if (!std::isfinite(x)) return 0;
  const double v = std::nearbyint(static_cast<double>(x) * 32768.0);
  if (v >= 32767.0) return 32767;
  if (v <= -32768.0) return -32768;
  return static_cast<int16_t>(v);
}

std::string EncodeWav(std::span<const float> samples, int rate) {
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<uint32_t>(rate));
  PutU32(out, static_cast<uint32_t>(rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float x : samples) PutU16(out, static_cast<uint16_t>(FloatToPcm16(x)));
  return out;
}

void WriteWav(const std::string& path, std::span<const float> samples, int rate) {
  WriteFileAtomic(path, EncodeWav(samples, rate));
}

std::vector<float> QuantizePcm16(std::span<const float> samples) {
  std::vector<float> out(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    out[i] = Pcm16ToFloat(FloatToPcm16(samples[i]));
  }
  return out;
}

}  // namespace vadkit

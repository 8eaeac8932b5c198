// vadkit/fixture_synth.cc

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

#include "fixture_synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "vadkit/audio_io.h"
#include "vadkit/noisegen.h"

namespace vadkit::fixture {

namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;
constexpr double kFs = kSampleRate;

struct Resonator {
  double a1 = 0, a2 = 0, b0 = 1, y1 = 0, y2 = 0;
  void Set(double freq, double bw) {
    const double r = std::exp(-kPi * bw / kFs);
    a1 = 2.0 * r * std::cos(2.0 * kPi * freq / kFs);
    a2 = -r * r;
    b0 = 1.0 - r;
  }
  double operator()(double x) {
    const double y = b0 * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Pink {
  double b0 = 0, b1 = 0, b2 = 0;
  double operator()(double w) {
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    return (b0 + b1 + b2 + w * 0.1848) * 0.2;
  }
};

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int64_t Samples(double seconds) { return std::llround(seconds * kFs); }

void Normalize(std::vector<float>& x, double rms) {
  const double cur = Rms(x);
  if (cur <= 0.0) return;
  for (float& v : x) v = static_cast<float>(v * rms / cur);
}

// F1, F2, F3 of a handful of vowels.
constexpr double kVowels[][3] = {{730, 1090, 2440}, {270, 2290, 3010}, {300, 870, 2240},
                                 {530, 1840, 2480}, {570, 840, 2410},  {660, 1720, 2410}};

class SyllableSynth {
 public:
  SyllableSynth(const Voice& v, std::mt19937_64& rng) : voice_(v), rng_(rng) {}

  // Appends one syllable: an optional consonant and a vowel, each scaled to
  // a fixed RMS relative to the vowel so every segment is audible.
  void Syllable(std::vector<double>& out, double f0_scale) {
    std::normal_distribution<double> g;
    const size_t begin = out.size();
    std::vector<double> seg;
    auto append = [&](double rms) {
      double e = 0.0;
      for (double v : seg) e += v * v;
      const double cur = seg.empty() ? 0.0 : std::sqrt(e / seg.size());
      for (double v : seg) out.push_back(cur > 0 ? v * rms / cur : 0.0);
      seg.clear();
    };
    const double p = Uniform(rng_, 0, 1);
    if (p < 0.35) {
      // Fricative onset.
      Resonator r;
      r.Set(Uniform(rng_, 2500, 5500), Uniform(rng_, 1200, 2500));
      const int64_t n = Samples(Uniform(rng_, 0.04, 0.09));
      for (int64_t i = 0; i < n; ++i) seg.push_back(r(g(rng_)));
      append(0.25);
    } else if (p < 0.6) {
      // Stop: short weak closure, then a decaying burst.
      const int64_t closure = Samples(Uniform(rng_, 0.008, 0.02));
      for (int64_t i = 0; i < closure; ++i) seg.push_back(g(rng_));
      append(0.03);
      Resonator r;
      r.Set(Uniform(rng_, 1500, 4000), 2000);
      const int64_t n = Samples(0.015);
      for (int64_t i = 0; i < n; ++i) seg.push_back(r(g(rng_)) * (1.0 - double(i) / n));
      append(0.5);
    }
    const auto& vw = kVowels[std::uniform_int_distribution<int>(0, 5)(rng_)];
    Resonator f1, f2, f3, f4;
    const double s = voice_.formant_scale;
    f1.Set(vw[0] * s, 80);
    f2.Set(vw[1] * s, 110);
    f3.Set(vw[2] * s, 170);
    f4.Set(3500 * s, 250);
    const int64_t n = Samples(Uniform(rng_, 0.09, 0.2));
    const double f0 = voice_.f0 * f0_scale * Uniform(rng_, 0.92, 1.08);
    const double bend = Uniform(rng_, -0.15, 0.15);
    double phase = 1.0, tilt = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / n;
      phase += f0 * (1.0 + bend * t) / kFs;
      double src = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        src = 1.0;
      }
      tilt = 0.9 * tilt + src;
      seg.push_back(f4(f3(f2(f1(tilt + 0.05 * g(rng_))))));
    }
    append(Uniform(rng_, 0.7, 1.0));
    // Raised-cosine ramps over the whole syllable.
    const int64_t len = static_cast<int64_t>(out.size() - begin);
    const int64_t ramp = std::min<int64_t>(Samples(0.015), len / 2);
    for (int64_t i = 0; i < ramp; ++i) {
      const double w = 0.5 - 0.5 * std::cos(kPi * (i + 0.5) / ramp);
      out[begin + i] *= w;
      out[begin + len - 1 - i] *= w;
    }
  }

 private:
  const Voice& voice_;
  std::mt19937_64& rng_;
};

std::vector<double> SynthWord(const Voice& v, std::mt19937_64& rng, double f0_scale,
                              int max_syllables) {
  std::vector<double> w;
  SyllableSynth syl(v, rng);
  const int n = std::uniform_int_distribution<int>(1, max_syllables)(rng);
  for (int i = 0; i < n; ++i) syl.Syllable(w, f0_scale);
  const double gain = v.level * Uniform(rng, 0.7, 1.0);
  for (double& x : w) x *= gain;
  return w;
}

std::vector<float> Floor(int64_t n, std::mt19937_64& rng, double rms) {
  std::normal_distribution<double> g;
  Pink pink;
  std::vector<float> out(static_cast<size_t>(n));
  for (auto& x : out) x = static_cast<float>(pink(g(rng)));
  Normalize(out, rms);
  return out;
}

}  // namespace

Voice VoiceForSpeaker(const std::string& speaker_id, uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, "voice/" + speaker_id));
  Voice v;
  const bool low = Uniform(rng, 0, 1) < 0.5;
  v.f0 = low ? Uniform(rng, 95, 140) : Uniform(rng, 170, 240);
  v.formant_scale = low ? Uniform(rng, 0.9, 1.0) : Uniform(rng, 1.05, 1.18);
  v.level = Uniform(rng, 0.05, 0.1);
  return v;
}

PauseStyle DensePauses() {
  PauseStyle p;
  p.edge_min = 0.08;
  p.edge_max = 0.15;
  // Frequent pauses just under the energy VAD's gap-closing length, so the
  // 20th-percentile frame is silence but the smoothed labels are dense.
  p.short_min = 0.07;
  p.short_max = 0.095;
  p.long_prob = 0.0;
  p.max_syllables = 1;
  return p;
}

SyntheticUtterance SynthUtterance(const std::string& id, const Voice& voice, double seconds,
                                  const PauseStyle& pauses, uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, "utt/" + id));
  const int64_t target = Samples(seconds);
  std::vector<double> audio;
  std::vector<std::pair<double, double>> words;
  int64_t cursor = Samples(Uniform(rng, pauses.edge_min, pauses.edge_max));
  audio.assign(static_cast<size_t>(cursor), 0.0);
  // Words until the target is reached; the duration floats by up to a word.
  while (true) {
    const double f0_scale = 1.1 - 0.2 * static_cast<double>(cursor) / target;
    auto w = SynthWord(voice, rng, f0_scale, pauses.max_syllables);
    audio.insert(audio.end(), w.begin(), w.end());
    const int64_t len = static_cast<int64_t>(w.size());
    words.emplace_back(cursor / kFs, (cursor + len) / kFs);
    cursor += len;
    if (cursor + Samples(pauses.edge_max) >= target) break;
    const bool long_pause = Uniform(rng, 0, 1) < pauses.long_prob;
    const double pause = long_pause ? Uniform(rng, pauses.long_min, pauses.long_max)
                                    : Uniform(rng, pauses.short_min, pauses.short_max);
    const int64_t p = Samples(pause);
    audio.insert(audio.end(), static_cast<size_t>(p), 0.0);
    cursor += p;
  }
  const int64_t total = cursor + Samples(Uniform(rng, pauses.edge_min, pauses.edge_max));
  audio.resize(static_cast<size_t>(total), 0.0);
  auto floor = Floor(total, rng, 0.001);
  SyntheticUtterance out;
  out.utterance.id = id;
  out.utterance.samples.resize(static_cast<size_t>(total));
  for (int64_t i = 0; i < total; ++i) {
    out.utterance.samples[i] = static_cast<float>(audio[i] + floor[i]);
  }
  out.utterance.samples = QuantizePcm16(out.utterance.samples);
  out.track = MakeTrack(id, total / kFs, words);
  return out;
}

std::vector<float> SynthEnvironmentalNoise(NoiseType type, double seconds, uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, "env/" + std::string(NoiseTypeName(type))));
  std::normal_distribution<double> g;
  const int64_t n = Samples(seconds);
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  Pink pink;
  auto events = [&](double rate_hz, auto&& emit) {
    double t = Uniform(rng, 0.0, 1.0 / rate_hz);
    while (t < seconds) {
      emit(Samples(t));
      t += std::exponential_distribution<double>(rate_hz)(rng);
    }
  };
  auto tone = [&](int64_t at, double freq, double dur, double amp, double sweep) {
    const int64_t len = Samples(dur);
    double ph = 0.0;
    for (int64_t i = 0; i < len && at + i < n; ++i) {
      const double t = static_cast<double>(i) / len;
      ph += 2 * kPi * freq * (1.0 + sweep * t) / kFs;
      x[at + i] += amp * std::sin(kPi * t) * std::sin(ph);
    }
  };
  auto clicks = [&](int64_t at, double freq, double amp, double decay_s) {
    Resonator r;
    r.Set(freq, freq * 0.3);
    const int64_t len = Samples(decay_s * 5);
    for (int64_t i = 0; i < len && at + i < n; ++i) {
      x[at + i] += amp * r(g(rng)) * std::exp(-static_cast<double>(i) / (decay_s * kFs));
    }
  };
  switch (type) {
    case NoiseType::kNature: {
      double lp = 0.0;
      const double ph = Uniform(rng, 0, 2 * kPi);
      for (int64_t i = 0; i < n; ++i) {
        lp = 0.985 * lp + 0.015 * g(rng);
        x[i] = 6.0 * lp * (1.2 + std::sin(2 * kPi * 0.15 * i / kFs + ph));
      }
      events(1.5, [&](int64_t at) {
        tone(at, Uniform(rng, 2500, 5000), Uniform(rng, 0.06, 0.2), 0.5, Uniform(rng, -0.3, 0.3));
      });
      break;
    }
    case NoiseType::kOffice: {
      for (int64_t i = 0; i < n; ++i) {
        const double t = i / kFs;
        x[i] = 0.3 * pink(g(rng)) + 0.05 * std::sin(2 * kPi * 120 * t) +
               0.03 * std::sin(2 * kPi * 240 * t);
      }
      events(0.4, [&](int64_t at) {
        const int keys = std::uniform_int_distribution<int>(3, 15)(rng);
        int64_t k = at;
        for (int i = 0; i < keys; ++i) {
          clicks(k, Uniform(rng, 2000, 4000), 2.0, 0.004);
          k += Samples(Uniform(rng, 0.08, 0.25));
        }
      });
      break;
    }
    case NoiseType::kPublic: {
      for (int band = 0; band < 4; ++band) {
        Resonator r;
        r.Set(Uniform(rng, 400, 2500), Uniform(rng, 300, 900));
        const double rate = Uniform(rng, 2.5, 5.0);
        const double ph = Uniform(rng, 0, 2 * kPi);
        for (int64_t i = 0; i < n; ++i) {
          const double am = 0.5 + 0.5 * std::sin(2 * kPi * rate * i / kFs + ph);
          x[i] += r(g(rng)) * am * am;
        }
      }
      events(0.8, [&](int64_t at) { clicks(at, Uniform(rng, 300, 1200), 0.6, 0.02); });
      break;
    }
    case NoiseType::kStreet: {
      double brown = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        brown = 0.995 * brown + 0.05 * g(rng);
        x[i] = brown;
      }
      events(0.2, [&](int64_t at) {
        Resonator r;
        r.Set(Uniform(rng, 300, 900), 800);
        const double dur = Uniform(rng, 2.0, 5.0);
        const int64_t len = Samples(dur);
        for (int64_t i = 0; i < len && at + i < n; ++i) {
          const double t = (static_cast<double>(i) / len - 0.5) * 6.0;
          x[at + i] += 1.5 * r(g(rng)) * std::exp(-t * t);
        }
      });
      break;
    }
    case NoiseType::kTransport: {
      double brown = 0.0, ph = 0.0;
      const double base = Uniform(rng, 30, 50);
      for (int64_t i = 0; i < n; ++i) {
        const double t = i / kFs;
        const double f = base * (1.0 + 0.05 * std::sin(2 * kPi * 0.05 * t));
        ph += 2 * kPi * f / kFs;
        double harm = 0.0;
        for (int k = 1; k <= 20; ++k) harm += std::sin(k * ph) / k;
        brown = 0.99 * brown + 0.05 * g(rng);
        x[i] = 0.2 * harm + brown;
      }
      events(3.0, [&](int64_t at) { clicks(at, Uniform(rng, 1500, 3000), 0.3, 0.01); });
      break;
    }
    case NoiseType::kCity: {
      double brown = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        brown = 0.997 * brown + 0.04 * g(rng);
        x[i] = 0.5 * pink(g(rng)) + brown;
      }
      events(0.1, [&](int64_t at) {
        const double f = Uniform(rng, 350, 500);
        for (int k = 1; k <= 4; ++k) tone(at, f * k, Uniform(rng, 0.3, 0.8), 0.3 / k, 0.0);
      });
      break;
    }
    case NoiseType::kDomestic: {
      Resonator motor;
      motor.Set(Uniform(rng, 1000, 2500), 1500);
      for (int64_t i = 0; i < n; ++i) {
        const double t = i / kFs;
        x[i] = 0.4 * motor(g(rng)) + 0.08 * std::sin(2 * kPi * 100 * t) +
               0.04 * std::sin(2 * kPi * 300 * t);
      }
      events(0.6, [&](int64_t at) { clicks(at, Uniform(rng, 3000, 6000), 1.5, 0.03); });
      events(0.15, [&](int64_t at) {
        const double f = Uniform(rng, 220, 440);
        tone(at, f, 1.0, 0.15, 0.0);
        tone(at, f * 1.25, 1.0, 0.1, 0.0);
        tone(at, f * 1.5, 1.0, 0.1, 0.0);
      });
      break;
    }
    case NoiseType::kBabble:
    case NoiseType::kSsn:
      throw VadError("environmental noise: " + std::string(NoiseTypeName(type)) +
                     " is synthesised by gen-noise");
  }
  std::vector<float> out(x.begin(), x.end());
  Normalize(out, kNoiseRms);
  return QuantizePcm16(out);
}

void WriteCleanCorpus(const std::string& dir, const FixtureLayout& layout, uint64_t seed) {
  const fs::path root(dir);
  std::string jsonl;
  for (int s = 0; s < layout.speakers; ++s) {
    const std::string speaker = std::to_string(1000 + 37 * s);
    const Split split = s < layout.speakers - 2  ? Split::kTrain
                        : s < layout.speakers - 1 ? Split::kVal
                                                  : Split::kTest;
    const Voice voice = VoiceForSpeaker(speaker, seed);
    for (int u = 0; u < layout.utterances_per_speaker; ++u) {
      const std::string id = fmt::format("{}-{}-{:04d}", speaker, 100 + s, u);
      std::mt19937_64 rng(DeriveSeed(seed, "len/" + id));
      const double secs = layout.utterance_seconds + Uniform(rng, -0.1, 0.1);
      auto su = SynthUtterance(id, voice, secs, PauseStyle(), seed);
      WriteWav((root / "clean" / std::string(SplitName(split)) / (id + ".wav")).string(),
               su.utterance.samples);
      jsonl += AlignmentToJson(su.track) + "\n";
    }
  }
  WriteFileAtomic((root / "alignments.jsonl").string(), jsonl);
}

void WriteNoiseSources(const std::string& dir, const FixtureLayout& layout, uint64_t seed) {
  const fs::path root(dir);
  for (int s = 0; s < layout.source_speakers; ++s) {
    const std::string speaker = std::to_string(5000 + 11 * s);
    const Voice voice = VoiceForSpeaker(speaker, seed);
    for (int u = 0; u < layout.source_utterances; ++u) {
      const std::string id = fmt::format("{}-{}-{:04d}", speaker, 7, u);
      auto su = SynthUtterance(id, voice, layout.source_seconds, DensePauses(), seed);
      WriteWav((root / "speakers" / speaker / (id + ".wav")).string(), su.utterance.samples);
    }
  }
  for (NoiseType type : kAllNoiseTypes) {
    if (type == NoiseType::kBabble || type == NoiseType::kSsn) continue;
    for (Split split : kAllSplits) {
      for (int r = 0; r < layout.recordings_per_split; ++r) {
        const std::string name = fmt::format("{}_{}", SplitName(split), r);
        const auto audio = SynthEnvironmentalNoise(
            type, layout.recording_seconds, DeriveSeed(seed, "rec/" + name));
        WriteWav((root / "recordings" / std::string(NoiseTypeName(type)) /
                  std::string(SplitName(split)) / (name + ".wav"))
                     .string(),
                 audio);
      }
    }
  }
}

std::string LibriSpeechAlignmentLine(const AlignmentTrack& track) {
  std::string words, times;
  int wi = 0;
  for (size_t i = 0; i < track.intervals.size(); ++i) {
    const auto& iv = track.intervals[i];
    if (i > 0) {
      words += ",";
      times += ",";
    }
    if (iv.kind == IntervalKind::kWord) words += fmt::format("W{}", wi++);
    times += fmt::format("{:.3f}", iv.end);
  }
  return fmt::format("{} \"{}\" \"{}\"", track.utterance_id, words, times);
}

}  // namespace vadkit::fixture

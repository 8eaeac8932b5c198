// vadkit/mixer.cc

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

#include "vadkit/mixer.h"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include "vadkit/audio_io.h"

namespace vadkit {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.jsonl";
constexpr const char* kJournalName = "manifest.jsonl.partial";

double MeanPower(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double ActivePower(std::span<const float> speech, const std::vector<uint8_t>& mask) {
  double acc = 0.0;
  int64_t n = 0;
  for (size_t i = 0; i < speech.size(); ++i) {
    if (!mask[i]) continue;
    acc += static_cast<double>(speech[i]) * speech[i];
    ++n;
  }
  if (n == 0) throw VadError("no speech-active region");
  return acc / static_cast<double>(n);
}

void CheckAligned(std::span<const float> speech, const FrameLabels& labels, int rate) {
  if (static_cast<int64_t>(labels.size()) !=
      NumFrames(static_cast<int64_t>(speech.size()), labels.frame_params, rate)) {
    throw VadError("labels not aligned with speech (" + std::to_string(labels.size()) +
                   " labels, " + std::to_string(speech.size()) + " samples)");
  }
}

std::map<std::string, ManifestEntry> LoadPrevious(const fs::path& dir) {
  std::map<std::string, ManifestEntry> prev;
  for (const char* name : {kManifestName, kJournalName}) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    std::ifstream is(p);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      try {
        auto e = ManifestEntryFromJson(line);
        prev[e.output_path] = std::move(e);
      } catch (const VadError&) {
        // A torn journal line from an interrupted run; regenerate that entry.
      }
    }
  }
  return prev;
}

bool SameRecipe(const ManifestEntry& a, const ManifestEntry& b) {
  return a.clean_id == b.clean_id && a.noise_type == b.noise_type &&
         a.snr_db == b.snr_db && a.split == b.split && a.seed == b.seed &&
         a.noise_offset == b.noise_offset && a.output_path == b.output_path &&
         a.label_path == b.label_path;
}

}  // namespace

std::vector<uint8_t> SpeechActiveMask(const FrameLabels& labels, int64_t num_samples,
                                      int rate) {
  std::vector<uint8_t> mask(static_cast<size_t>(num_samples), 0);
  const int win = labels.frame_params.WindowSamples(rate);
  const int hop = labels.frame_params.HopSamples(rate);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!labels.IsSpeech(i)) continue;
    const int64_t b = static_cast<int64_t>(i) * hop;
    const int64_t e = std::min<int64_t>(b + win, num_samples);
    std::fill(mask.begin() + b, mask.begin() + e, 1);
  }
  return mask;
}

double ActiveSnr(std::span<const float> speech, const FrameLabels& labels,
                 std::span<const float> noise_slice, int rate) {
  if (noise_slice.size() != speech.size()) {
    throw VadError("active_snr: noise slice length differs from speech");
  }
  CheckAligned(speech, labels, rate);
  const auto mask = SpeechActiveMask(labels, static_cast<int64_t>(speech.size()), rate);
  const double ps = ActivePower(speech, mask);
  const double pn = MeanPower(noise_slice);
  if (!(pn > 0.0)) throw VadError("active_snr: silent noise slice");
  return 10.0 * std::log10(ps / pn);
}

std::vector<float> TileNoise(std::span<const float> noise, int64_t offset, int64_t length) {
  if (noise.empty()) throw VadError("tile: empty noise");
  const int64_t n = static_cast<int64_t>(noise.size());
  std::vector<float> out(static_cast<size_t>(length));
  int64_t pos = ((offset % n) + n) % n;
  for (int64_t i = 0; i < length; ++i) {
    out[i] = noise[pos];
    if (++pos == n) pos = 0;
  }
  return out;
}

int64_t DrawNoiseOffset(uint64_t seed, int64_t noise_len) {
  if (noise_len <= 0) throw VadError("mix: empty noise");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> dist(0, noise_len - 1);
  return dist(rng);
}

MixResult MixAtSnr(std::span<const float> speech, const FrameLabels& labels,
                   std::span<const float> noise, double target_db, uint64_t seed,
                   int rate) {
  if (noise.empty()) throw VadError("mix: empty noise");
  CheckAligned(speech, labels, rate);
  const int64_t len = static_cast<int64_t>(speech.size());
  const auto mask = SpeechActiveMask(labels, len, rate);
  const double ps = ActivePower(speech, mask);

  MixResult res;
  res.noise_offset = DrawNoiseOffset(seed, static_cast<int64_t>(noise.size()));
  const auto tiled = TileNoise(noise, res.noise_offset, len);
  const double pn = MeanPower(tiled);
  if (!(pn > 0.0)) throw VadError("mix: silent noise");
  res.noise_scale = std::sqrt(ps / (pn * std::pow(10.0, target_db / 10.0)));

  std::vector<double> mix(static_cast<size_t>(len));
  double peak = 0.0;
  for (int64_t i = 0; i < len; ++i) {
    mix[i] = static_cast<double>(speech[i]) + res.noise_scale * tiled[i];
    peak = std::max(peak, std::abs(mix[i]));
  }
  res.peak_after_mix = peak;
  res.output_gain = peak > 1.0 ? 1.0 / peak : 1.0;
  res.audio.resize(static_cast<size_t>(len));
  for (int64_t i = 0; i < len; ++i) {
    res.audio[i] = static_cast<float>(mix[i] * res.output_gain);
  }
  // Measured on the components exactly as they were summed.
  double as = 0.0, an = 0.0;
  int64_t na = 0;
  for (int64_t i = 0; i < len; ++i) {
    const double n = res.noise_scale * tiled[i] * res.output_gain;
    an += n * n;
    if (mask[i]) {
      const double s = static_cast<double>(speech[i]) * res.output_gain;
      as += s * s;
      ++na;
    }
  }
  res.achieved_snr_db = 10.0 * std::log10((as / na) / (an / len));
  return res;
}

std::string EntryKey(Split split, NoiseType type, int snr_db, const std::string& clean_id) {
  return std::string(SplitName(split)) + "/" + std::string(NoiseTypeName(type)) + "/" +
         std::to_string(snr_db) + "/" + clean_id;
}

DatasetResult GenerateDataset(std::span<const CleanItem> clean,
                              std::span<const NoiseSource> noises,
                              const DatasetConfig& config) {
  if (config.out_dir.empty()) throw VadError("generate: out_dir is required");
  for (int snr : config.snr_levels) {
    if (!IsValidSnrLevel(snr)) {
      throw VadError("generate: SNR " + std::to_string(snr) + " is not a supported level");
    }
  }
  std::map<std::pair<NoiseType, Split>, const NoiseSource*> by_key;
  for (const auto& ns : noises) by_key[{ns.type, ns.split}] = &ns;
  for (const auto& item : clean) {
    for (NoiseType t : config.noise_types) {
      auto it = by_key.find({t, item.split});
      if (it == by_key.end() || it->second->audio.empty()) {
        throw VadError("generate: missing " + std::string(NoiseTypeName(t)) + " noise for split " +
                       std::string(SplitName(item.split)));
      }
    }
  }

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  std::map<std::string, ManifestEntry> previous;
  if (config.resume) previous = LoadPrevious(out_dir);

  const size_t per_utt = config.noise_types.size() * config.snr_levels.size();
  DatasetResult result;
  result.entries.resize(clean.size() * per_utt);
  std::vector<uint8_t> ok(result.entries.size(), 0);
  std::vector<std::vector<EntryError>> errors(clean.size());
  int64_t written = 0, skipped = 0;

  std::mutex journal_mu;
  std::ofstream journal(out_dir / kJournalName, std::ios::app);
  const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers) reduction(+ : written, skipped)
  for (size_t u = 0; u < clean.size(); ++u) {
    const CleanItem& item = clean[u];
    Utterance utt;
    bool loaded = false;
    for (size_t c = 0; c < per_utt; ++c) {
      const NoiseType type = config.noise_types[c / config.snr_levels.size()];
      const int snr = config.snr_levels[c % config.snr_levels.size()];
      const std::string key = EntryKey(item.split, type, snr, item.id);
      const auto& noise = by_key.at({type, item.split})->audio;
      ManifestEntry e;
      e.clean_id = item.id;
      e.noise_type = type;
      e.snr_db = snr;
      e.split = item.split;
      e.seed = DeriveSeed(config.master_seed, key);
      e.noise_offset = DrawNoiseOffset(e.seed, static_cast<int64_t>(noise.size()));
      e.output_path = key + ".wav";
      e.label_path = key + ".lab";
      try {
        if (config.resume) {
          auto it = previous.find(e.output_path);
          if (it != previous.end() && SameRecipe(it->second, e) &&
              fs::exists(out_dir / e.output_path) && fs::exists(out_dir / e.label_path)) {
            result.entries[u * per_utt + c] = it->second;
            ok[u * per_utt + c] = 1;
            ++skipped;
            continue;
          }
        }
        const auto t0 = std::chrono::steady_clock::now();
        if (!loaded) {
          utt = ReadAudio(item.audio_path);
          loaded = true;
        }
        auto mix = MixAtSnr(utt.samples, item.labels, noise, snr, e.seed, utt.sample_rate);
        e.noise_scale = mix.noise_scale;
        e.output_gain = mix.output_gain;
        e.achieved_snr_db = mix.achieved_snr_db;
        WriteWav((out_dir / e.output_path).string(), mix.audio, utt.sample_rate);
        WriteFileAtomic((out_dir / e.label_path).string(),
                        FormatLabelLine(item.id, item.labels) + "\n");
        {
          std::lock_guard<std::mutex> lock(journal_mu);
          journal << ManifestEntryToJson(e) << '\n' << std::flush;
          if (config.on_entry) {
            config.on_entry(e, std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t0).count());
          }
        }
        result.entries[u * per_utt + c] = e;
        ok[u * per_utt + c] = 1;
        ++written;
      } catch (const std::exception& ex) {
        errors[u].push_back({e.output_path, ex.what()});
      }
    }
  }
  journal.close();

  std::vector<ManifestEntry> done;
  done.reserve(result.entries.size());
  for (size_t i = 0; i < result.entries.size(); ++i) {
    if (ok[i]) done.push_back(result.entries[i]);
  }
  result.entries = std::move(done);
  for (auto& errs : errors) {
    result.errors.insert(result.errors.end(), errs.begin(), errs.end());
  }
  result.written = written;
  result.skipped = skipped;
  WriteManifestFile((out_dir / kManifestName).string(), result.entries);
  if (result.errors.empty()) fs::remove(out_dir / kJournalName);
  return result;
}

double VerifyEntrySnr(const ManifestEntry& entry, const std::string& out_dir,
                      std::span<const float> noise, const FrameLabels& labels) {
  const auto mixed = ReadAudio((fs::path(out_dir) / entry.output_path).string());
  const int64_t len = static_cast<int64_t>(mixed.samples.size());
  const auto tiled = TileNoise(noise, entry.noise_offset, len);
  std::vector<float> noise_part(static_cast<size_t>(len)), speech_part(static_cast<size_t>(len));
  const double k = entry.noise_scale * entry.output_gain;
  for (int64_t i = 0; i < len; ++i) {
    noise_part[i] = static_cast<float>(k * tiled[i]);
    speech_part[i] = static_cast<float>(mixed.samples[i] - k * tiled[i]);
  }
  return ActiveSnr(speech_part, labels, noise_part, mixed.sample_rate);
}

}  // namespace vadkit

// vadkit/corpus.cc

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

#include "vadkit/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vadkit {

namespace {

constexpr std::array<std::string_view, 9> kNoiseNames = {
    "Nature", "Office", "Public", "Street",  "Transport",
    "City",   "Babble", "SSN",    "Domestic"};

constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val",
                                                          "test"};

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view NoiseTypeName(NoiseType type) {
  return kNoiseNames[static_cast<size_t>(type)];
}

std::optional<NoiseType> ParseNoiseType(std::string_view name) {
  for (size_t i = 0; i < kNoiseNames.size(); ++i) {
    if (kNoiseNames[i] == name) return static_cast<NoiseType>(i);
  }
  return std::nullopt;
}

bool IsSeenNoise(NoiseType type) {
  return type != NoiseType::kBabble && type != NoiseType::kSsn &&
         type != NoiseType::kDomestic;
}

bool IsValidSnrLevel(int snr_db) {
  return std::find(kSnrLevels.begin(), kSnrLevels.end(), snr_db) !=
         kSnrLevels.end();
}

std::string_view SplitName(Split split) {
  return kSplitNames[static_cast<size_t>(split)];
}

std::optional<Split> ParseSplit(std::string_view name) {
  for (size_t i = 0; i < kSplitNames.size(); ++i) {
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  }
  return std::nullopt;
}

void ValidateUtterance(const Utterance& utt) {
  if (utt.sample_rate <= 0) {
    throw VadError("utterance " + utt.id + ": non-positive sample rate");
  }
  for (size_t i = 0; i < utt.samples.size(); ++i) {
    if (!std::isfinite(utt.samples[i])) {
      throw VadError("utterance " + utt.id + ": non-finite sample at index " +
                     std::to_string(i));
    }
  }
}

int FrameParams::WindowSamples(int rate) const {
  return static_cast<int>(std::lround(window * rate));
}

int FrameParams::HopSamples(int rate) const {
  return static_cast<int>(std::lround(hop * rate));
}

void FrameParams::Validate() const {
  if (!(hop > 0.0) || hop > window) {
    throw VadError("frame params: require 0 < hop <= window");
  }
}

int64_t NumFrames(int64_t signal_len, const FrameParams& fp, int rate) {
  const int64_t win = fp.WindowSamples(rate);
  const int64_t hop = fp.HopSamples(rate);
  if (signal_len < win) return 0;
  return 1 + (signal_len - win) / hop;
}

int64_t FrameCenterSample(int64_t i, const FrameParams& fp, int rate) {
  return i * fp.HopSamples(rate) + fp.WindowSamples(rate) / 2;
}

size_t FrameLabels::NumSpeech() const {
  return static_cast<size_t>(
      std::count_if(labels.begin(), labels.end(), [](uint8_t l) { return l; }));
}

void ValidateManifestEntry(const ManifestEntry& entry) {
  if (entry.clean_id.empty()) throw VadError("manifest: empty clean_id");
  if (!IsValidSnrLevel(entry.snr_db)) {
    throw VadError("manifest: snr_db " + std::to_string(entry.snr_db) +
                   " is not one of the six levels");
  }
  if (entry.noise_offset < 0) throw VadError("manifest: negative noise_offset");
}

std::string ManifestEntryToJson(const ManifestEntry& e) {
  // Key order is fixed so manifests are byte-stable.
  nlohmann::ordered_json j;
  j["clean_id"] = e.clean_id;
  j["noise_type"] = NoiseTypeName(e.noise_type);
  j["snr_db"] = e.snr_db;
  j["split"] = SplitName(e.split);
  j["noise_offset"] = e.noise_offset;
  j["seed"] = e.seed;
  j["output_path"] = e.output_path;
  j["label_path"] = e.label_path;
  j["noise_scale"] = e.noise_scale;
  j["output_gain"] = e.output_gain;
  j["achieved_snr_db"] = e.achieved_snr_db;
  return j.dump();
}

ManifestEntry ManifestEntryFromJson(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw VadError(std::string("manifest: malformed line: ") + ex.what());
  }
  ManifestEntry e;
  try {
    e.clean_id = j.at("clean_id").get<std::string>();
    const auto noise = j.at("noise_type").get<std::string>();
    auto type = ParseNoiseType(noise);
    if (!type) throw VadError("manifest: unknown noise_type " + noise);
    e.noise_type = *type;
    e.snr_db = j.at("snr_db").get<int>();
    const auto split = j.at("split").get<std::string>();
    auto sp = ParseSplit(split);
    if (!sp) throw VadError("manifest: unknown split " + split);
    e.split = *sp;
    e.noise_offset = j.at("noise_offset").get<int64_t>();
    e.seed = j.at("seed").get<uint64_t>();
    e.output_path = j.at("output_path").get<std::string>();
    e.label_path = j.at("label_path").get<std::string>();
    e.noise_scale = j.value("noise_scale", 0.0);
    e.output_gain = j.value("output_gain", 1.0);
    e.achieved_snr_db = j.value("achieved_snr_db", 0.0);
  } catch (const nlohmann::json::exception& ex) {
    throw VadError(std::string("manifest: ") + ex.what());
  }
  ValidateManifestEntry(e);
  return e;
}

void WriteManifest(std::ostream& os, std::span<const ManifestEntry> entries) {
  for (const auto& e : entries) os << ManifestEntryToJson(e) << '\n';
}

std::vector<ManifestEntry> ReadManifest(std::istream& is) {
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(ManifestEntryFromJson(line));
  }
  return out;
}

std::vector<ManifestEntry> ReadManifestFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw VadError("cannot open manifest " + path);
  return ReadManifest(is);
}

void WriteManifestFile(const std::string& path,
                       std::span<const ManifestEntry> entries) {
  std::ostringstream os;
  WriteManifest(os, entries);
  WriteFileAtomic(path, os.str());
}

uint64_t DeriveSeed(uint64_t master_seed, std::string_view entry_id) {
  if (entry_id.empty()) throw VadError("DeriveSeed: empty entry id");
  return SplitMix64(Fnv1a64(entry_id) ^ SplitMix64(master_seed));
}

std::string FormatLabelLine(std::string_view utt_id, const FrameLabels& labels) {
  std::string line(utt_id);
  line.reserve(utt_id.size() + 1 + labels.size());
  line.push_back(' ');
  for (uint8_t l : labels.labels) line.push_back(l ? '1' : '0');
  return line;
}

std::pair<std::string, FrameLabels> ParseLabelLine(std::string_view line,
                                                   const FrameParams& fp) {
  const auto space = line.find(' ');
  if (space == std::string_view::npos || space == 0) {
    throw VadError("label line: expected '<id> <labels>'");
  }
  FrameLabels labels;
  labels.frame_params = fp;
  std::string_view bits = line.substr(space + 1);
  while (!bits.empty() && (bits.back() == '\r' || bits.back() == ' ')) {
    bits.remove_suffix(1);
  }
  labels.labels.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw VadError("label line: invalid label character '" +
                     std::string(1, c) + "'");
    }
    labels.labels.push_back(c == '1');
  }
  return {std::string(line.substr(0, space)), std::move(labels)};
}

void WriteLabelFile(const std::string& path, std::span<const LabeledId> items) {
  std::string out;
  for (const auto& item : items) {
    out += FormatLabelLine(item.id, item.labels);
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<LabeledId> ReadLabelFile(const std::string& path,
                                     const FrameParams& fp) {
  std::ifstream is(path);
  if (!is) throw VadError("cannot open label file " + path);
  std::vector<LabeledId> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto [id, labels] = ParseLabelLine(line, fp);
    out.push_back({std::move(id), std::move(labels)});
  }
  return out;
}

void WriteFileAtomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw VadError("cannot write " + tmp.string());
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw VadError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string ReadFileToString(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw VadError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace vadkit

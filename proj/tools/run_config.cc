// vadkit/run_config.cc

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

#include "run_config.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vadkit {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  return out;
}

template <typename T>
bool ParseNumber(const std::string& s, T* out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if constexpr (std::is_unsigned_v<T>) {
    if (*first == '-') return false;
  }
  const auto res = std::from_chars(first, last, *out);
  return res.ec == std::errc() && res.ptr == last;
}

bool ParseBool(const std::string& s, bool* out) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") {
    *out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "off" || s == "no") {
    *out = false;
    return true;
  }
  return false;
}

std::string AllNoiseNames() {
  std::string out;
  for (NoiseType t : kAllNoiseTypes) {
    if (!out.empty()) out += ",";
    out += NoiseTypeName(t);
  }
  return out;
}

}  // namespace

const std::vector<KeySpec>& ConfigKeys() {
  using K = KeyKind;
  static const std::vector<KeySpec> keys = {
      {"master_seed", K::kUint64, "0", "Seed every generator derives from"},
      {"out_dir", K::kOutputPath, "", "Directory the command writes into"},
      {"clean_dir", K::kInputPath, "", "Clean corpus: <dir>/<split>/*.wav|flac"},
      {"alignments", K::kInputPath, "", "Alignment JSONL"},
      {"labels_dir", K::kInputPath, "", "Label files: <dir>/<split>.lab"},
      {"speakers_dir", K::kInputPath, "", "Noise-source speakers: <dir>/<speaker>/*.wav"},
      {"recordings_dir", K::kInputPath, "", "Recorded noise: <dir>/<Type>/<split>/*.wav"},
      {"noise_dir", K::kInputPath, "", "Noise splits: <dir>/<Type>/<split>.wav"},
      {"data_dir", K::kInputPath, "", "Mixed dataset directory (holds manifest paths)"},
      {"manifest", K::kInputPath, "", "Dataset manifest JSONL"},
      {"features_dir", K::kInputPath, "", "Feature files written by `features`"},
      {"model", K::kInputPath, "", "bDNN checkpoint"},
      {"scores", K::kInputPath, "", "Score file"},
      {"labels", K::kInputPath, "", "Label file (eval/det without a manifest)"},
      {"input", K::kInputPath, "", "LibriSpeech-alignments text file"},
      {"snr_levels", K::kSnrList, "-5,0,5,10,15,20", "SNR levels in dB"},
      {"noise_types", K::kNoiseList, AllNoiseNames(), "Noise types to mix"},
      {"concat", K::kBool, "true", "Build the Concat corpus (false copies through)"},
      {"silence_ratio", K::kDouble, "0.25", "Inserted silence / (len1 + len2)"},
      {"stride", K::kInt, "10", "Keep every stride-th clean file"},
      {"feature_kind", K::kChoice, "mfcc", "Front end", {"mfcc", "gfcc"}},
      {"gt_filters", K::kInt, "64", "Gammatone filter count"},
      {"learning_rate", K::kDouble, "0.001", "SGD learning rate"},
      {"batch_size", K::kInt, "512", "Mini-batch size"},
      {"max_epochs", K::kInt, "50", "Training epochs"},
      {"hidden_units", K::kInt, "512", "Units per hidden layer"},
      {"context_left", K::kInt, "9", "Left context frames"},
      {"context_right", K::kInt, "19", "Right context frames"},
      {"train_split", K::kChoice, "train", "Split used for training", {"train", "val", "test"}},
      {"score_split", K::kChoice, "test", "Split to score", {"train", "val", "test"}},
      {"normalize_dcf", K::kBool, "false", "Divide MinDCF by the best trivial cost"},
      {"resume", K::kBool, "false", "Skip entries already completed"},
      {"lpc_order", K::kInt, "12", "LPC order for speech-shaped noise"},
      {"ssn_sources", K::kIntList, "18,2,2", "SSN speakers for train,val,test"},
      {"ssn_seconds", K::kDoubleList, "200,300,300", "Seconds per SSN speaker, per split"},
      {"babble_speakers", K::kIntList, "6,6,6", "Babble speakers for train,val,test"},
      {"noise_seconds", K::kDoubleList, "10800,1800,1800",
       "Babble and recorded-noise split durations"},
      {"min_snr_db", K::kDouble, "15", "Speaker screening: minimum estimated SNR"},
      {"min_speech_fraction", K::kDouble, "0.9", "Speaker screening: minimum speech fraction"},
      {"min_speech_seconds", K::kDouble, "600", "Speaker screening: minimum speech total"},
  };
  return keys;
}

const KeySpec* FindKey(std::string_view name) {
  for (const auto& k : ConfigKeys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string CheckValue(const KeySpec& spec, const std::string& value) {
  const auto bad = [&](const std::string& what) {
    return spec.name + ": '" + value + "' is not " + what;
  };
  switch (spec.kind) {
    case KeyKind::kInputPath:
    case KeyKind::kOutputPath:
      return value.empty() ? spec.name + ": empty path" : "";
    case KeyKind::kString:
      return "";
    case KeyKind::kInt: {
      int v;
      return ParseNumber(value, &v) ? "" : bad("an integer");
    }
    case KeyKind::kUint64: {
      uint64_t v;
      return ParseNumber(value, &v) ? "" : bad("a non-negative integer");
    }
    case KeyKind::kDouble: {
      double v;
      return ParseNumber(value, &v) ? "" : bad("a number");
    }
    case KeyKind::kBool: {
      bool v;
      return ParseBool(value, &v) ? "" : bad("a boolean");
    }
    case KeyKind::kIntList:
      for (const auto& item : SplitList(value)) {
        int v;
        if (!ParseNumber(item, &v)) return bad("a comma-separated integer list");
      }
      return value.empty() ? bad("a non-empty list") : "";
    case KeyKind::kSnrList:
      if (value.empty()) return bad("a non-empty list");
      for (const auto& item : SplitList(value)) {
        int v;
        if (!ParseNumber(item, &v) || !IsValidSnrLevel(v)) {
          return spec.name + ": '" + item + "' is not one of -5,0,5,10,15,20";
        }
      }
      return "";
    case KeyKind::kDoubleList:
      for (const auto& item : SplitList(value)) {
        double v;
        if (!ParseNumber(item, &v)) return bad("a comma-separated number list");
      }
      return value.empty() ? bad("a non-empty list") : "";
    case KeyKind::kNoiseList:
      if (value.empty()) return bad("a non-empty list");
      for (const auto& item : SplitList(value)) {
        if (!ParseNoiseType(item)) {
          return spec.name + ": unknown noise type '" + item + "' (expected one of " +
                 AllNoiseNames() + ")";
        }
      }
      return "";
    case KeyKind::kChoice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : "|") + c;
        return bad("one of " + all);
      }
      return "";
  }
  return "";
}

RunConfig RunConfig::ParseText(std::string_view text, std::vector<std::string>* errors) {
  RunConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors->push_back("config line " + std::to_string(number) + ": expected key = value");
      continue;
    }
    const std::string key = Trim(t.substr(0, eq));
    const std::string value = Trim(t.substr(eq + 1));
    if (FindKey(key) == nullptr) {
      errors->push_back("config line " + std::to_string(number) + ": unknown key '" + key + "'");
      continue;
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

RunConfig RunConfig::ParseFile(const std::string& path, std::vector<std::string>* errors) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    errors->push_back("cannot read config file " + path);
    return {};
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseText(ss.str(), errors);
}

std::optional<std::string> RunConfig::Raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const KeySpec* spec = FindKey(key);
  if (spec == nullptr) throw VadError("config: unknown key " + key);
  if (spec->default_value.empty()) return std::nullopt;
  return spec->default_value;
}

std::string RunConfig::Str(const std::string& key) const {
  auto v = Raw(key);
  if (!v) throw VadError("config: " + key + " is not set");
  return *v;
}

int RunConfig::Int(const std::string& key) const {
  int v = 0;
  if (!ParseNumber(Str(key), &v)) throw VadError("config: " + key + " is not an integer");
  return v;
}

uint64_t RunConfig::Uint64(const std::string& key) const {
  uint64_t v = 0;
  if (!ParseNumber(Str(key), &v)) throw VadError("config: " + key + " is not an integer");
  return v;
}

double RunConfig::Double(const std::string& key) const {
  double v = 0;
  if (!ParseNumber(Str(key), &v)) throw VadError("config: " + key + " is not a number");
  return v;
}

bool RunConfig::Bool(const std::string& key) const {
  bool v = false;
  if (!ParseBool(Str(key), &v)) throw VadError("config: " + key + " is not a boolean");
  return v;
}

std::vector<int> RunConfig::IntList(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : SplitList(Str(key))) {
    int v = 0;
    if (!ParseNumber(item, &v)) throw VadError("config: bad integer in " + key);
    out.push_back(v);
  }
  return out;
}

std::vector<double> RunConfig::DoubleList(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : SplitList(Str(key))) {
    double v = 0;
    if (!ParseNumber(item, &v)) throw VadError("config: bad number in " + key);
    out.push_back(v);
  }
  return out;
}

std::vector<NoiseType> RunConfig::NoiseList(const std::string& key) const {
  std::vector<NoiseType> out;
  for (const auto& item : SplitList(Str(key))) {
    auto t = ParseNoiseType(item);
    if (!t) throw VadError("config: unknown noise type " + item);
    out.push_back(*t);
  }
  return out;
}

std::vector<std::string> RunConfig::Validate(const std::vector<std::string>& used,
                                             const std::vector<std::string>& required) const {
  std::vector<std::string> errors;
  for (const auto& [key, value] : values_) {
    if (std::find(used.begin(), used.end(), key) == used.end()) {
      // Shared config files may carry keys for other commands.
      continue;
    }
    const auto msg = CheckValue(*FindKey(key), value);
    if (!msg.empty()) errors.push_back(msg);
  }
  for (const auto& key : required) {
    const auto v = Raw(key);
    if (!v || v->empty()) {
      errors.push_back(key + ": required but not set");
      continue;
    }
    if (FindKey(key)->kind == KeyKind::kInputPath && !std::filesystem::exists(*v)) {
      errors.push_back(key + ": path does not exist: " + *v);
    }
  }
  // Optional input paths that are set must still exist.
  for (const auto& key : used) {
    if (std::find(required.begin(), required.end(), key) != required.end()) continue;
    const KeySpec* spec = FindKey(key);
    const auto it = values_.find(key);
    if (spec != nullptr && spec->kind == KeyKind::kInputPath && it != values_.end() &&
        !std::filesystem::exists(it->second)) {
      errors.push_back(key + ": path does not exist: " + it->second);
    }
  }
  return errors;
}

std::string RunConfig::Dump(const std::vector<std::string>& keys) const {
  std::string out;
  for (const auto& key : keys) {
    const auto v = Raw(key);
    if (v) out += key + " = " + *v + "\n";
  }
  return out;
}

}  // namespace vadkit

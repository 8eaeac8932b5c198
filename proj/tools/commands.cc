// vadkit/commands.cc

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

#include "commands.h"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include <fmt/format.h>

#include "vadkit/audio_io.h"
#include "vadkit/bdnn.h"
#include "vadkit/concat.h"
#include "vadkit/features.h"
#include "vadkit/labeling.h"
#include "vadkit/metrics.h"
#include "vadkit/mixer.h"
#include "vadkit/noisegen.h"

namespace vadkit {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- logging

Logger::Logger(std::string command, LogLevel level, std::FILE* out)
    : command_(std::move(command)), level_(level), out_(out) {}

LogLevel Logger::LevelFromEnv() {
  const char* v = std::getenv("VADKIT_LOG_LEVEL");
  if (v == nullptr) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "debug") return LogLevel::kDebug;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "error") return LogLevel::kError;
  return LogLevel::kInfo;
}

void Logger::Log(LogLevel level, const std::string& event, Json fields) {
  if (level < level_ || out_ == nullptr) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  Json j;
  j["ts"] = std::chrono::duration<double>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
  j["level"] = kNames[static_cast<int>(level)];
  j["cmd"] = command_;
  j["event"] = event;
  for (auto& [k, v] : fields.items()) j[k] = v;
  const std::string line = j.dump() + "\n";
  std::fputs(line.c_str(), out_);
  std::fflush(out_);
}

int WorkersFromEnv() {
  const char* v = std::getenv("VADKIT_WORKERS");
  if (v == nullptr || *v == '\0') return 0;
  const int n = std::atoi(v);
  return n > 0 ? n : 0;
}

// ------------------------------------------------------------ command table

const std::vector<CommandSpec>& Commands() {
  static const std::vector<CommandSpec> table = {
      {"labels", "Alignments -> per-split frame label files",
       {"alignments", "clean_dir", "out_dir"},
       {"alignments", "clean_dir", "out_dir"}},
      {"concat", "Pair utterances with inserted silence (Concat corpus)",
       {"clean_dir", "labels_dir", "out_dir", "concat", "silence_ratio"},
       {"clean_dir", "labels_dir", "out_dir"}},
      {"gen-noise", "Synthesise SSN or babble, or assemble recorded noise splits",
       {"speakers_dir", "recordings_dir", "out_dir", "master_seed", "lpc_order",
        "ssn_sources", "ssn_seconds", "babble_speakers", "noise_seconds", "min_snr_db",
        "min_speech_fraction", "min_speech_seconds"},
       {"out_dir"}},
      {"mix", "Mix clean speech with every noise type at every SNR",
       {"clean_dir", "labels_dir", "noise_dir", "out_dir", "snr_levels", "noise_types",
        "master_seed", "resume"},
       {"clean_dir", "labels_dir", "noise_dir", "out_dir"}},
      {"subsample", "Keep every stride-th clean file of a manifest",
       {"manifest", "stride", "out_dir"},
       {"manifest", "out_dir"}},
      {"features", "MFCC/GFCC features for every manifest entry",
       {"manifest", "data_dir", "out_dir", "feature_kind", "gt_filters", "resume"},
       {"manifest", "out_dir"}},
      {"train-bdnn", "Train the bDNN classifier",
       {"manifest", "data_dir", "features_dir", "out_dir", "master_seed", "learning_rate",
        "batch_size", "max_epochs", "hidden_units", "context_left", "context_right",
        "train_split"},
       {"manifest", "features_dir", "out_dir"}},
      {"score", "Frame posteriors for one split",
       {"manifest", "features_dir", "model", "out_dir", "score_split"},
       {"manifest", "features_dir", "model", "out_dir"}},
      {"eval", "AUC table, pooled EER/MinDCF and DET points",
       {"scores", "manifest", "data_dir", "labels", "out_dir", "normalize_dcf"},
       {"scores", "out_dir"}},
      {"det", "Pooled DET points as CSV",
       {"scores", "manifest", "data_dir", "labels", "out_dir"},
       {"scores", "out_dir"}},
      {"convert-alignments", "LibriSpeech-alignments text -> alignment JSONL",
       {"input", "out_dir"},
       {"input", "out_dir"}},
  };
  return table;
}

const CommandSpec* FindCommand(const std::string& name) {
  for (const auto& c : Commands()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

// ---------------------------------------------------------------- helpers

bool IsAudio(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".wav" || ext == ".flac";
}

std::vector<fs::path> ListAudio(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && IsAudio(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });
  return out;
}

std::vector<fs::path> ListDirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Split> PresentSplits(const fs::path& clean_dir) {
  std::vector<Split> out;
  for (Split s : kAllSplits) {
    if (fs::is_directory(clean_dir / std::string(SplitName(s)))) out.push_back(s);
  }
  return out;
}

std::map<std::string, FrameLabels> ReadSplitLabels(const fs::path& labels_dir, Split split) {
  const auto path = labels_dir / (std::string(SplitName(split)) + ".lab");
  std::map<std::string, FrameLabels> out;
  for (auto& item : ReadLabelFile(path.string())) out[item.id] = std::move(item.labels);
  return out;
}

double SilenceFraction(int64_t frames, int64_t speech) {
  return frames > 0 ? static_cast<double>(frames - speech) / static_cast<double>(frames) : 0.0;
}

std::string EntryId(const ManifestEntry& e) {
  return e.output_path.substr(0, e.output_path.size() - fs::path(e.output_path).extension().string().size());
}

fs::path DataDir(const RunConfig& cfg) {
  if (auto d = cfg.Raw("data_dir")) return fs::path(*d);
  return fs::path(cfg.Str("manifest")).parent_path();
}

FrameLabels EntryLabels(const fs::path& data_dir, const ManifestEntry& e) {
  auto items = ReadLabelFile((data_dir / e.label_path).string());
  if (items.size() != 1) throw VadError("label file " + e.label_path + ": expected one line");
  return std::move(items[0].labels);
}

fs::path FeaturePath(const fs::path& features_dir, const ManifestEntry& e) {
  return features_dir / (EntryId(e) + ".vkft");
}

void SetWorkers(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

Json ErrorList(const std::vector<std::string>& errors, size_t limit = 20) {
  Json arr = Json::array();
  for (size_t i = 0; i < errors.size() && i < limit; ++i) arr.push_back(errors[i]);
  return arr;
}

// ------------------------------------------------------------------ labels

CommandResult RunLabels(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const fs::path clean(cfg.Str("clean_dir"));
  const fs::path out(cfg.Str("out_dir"));
  std::map<std::string, AlignmentTrack> tracks;
  for (auto& t : ReadAlignmentFile(cfg.Str("alignments"))) tracks[t.utterance_id] = std::move(t);
  const FrameParams fp;
  std::vector<std::string> errors;
  int64_t total_frames = 0, total_speech = 0, total_utts = 0;
  Json splits = Json::object();
  for (Split split : PresentSplits(clean)) {
    const auto files = ListAudio(clean / std::string(SplitName(split)));
    std::vector<LabeledId> items(files.size());
    std::vector<std::string> errs(files.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(files.size()); ++i) {
      try {
        const auto utt = ReadAudio(files[i].string());
        const auto it = tracks.find(utt.id);
        if (it == tracks.end()) throw VadError("no alignment for " + utt.id);
        if (std::abs(it->second.duration - utt.Duration()) > 0.01) {
          throw VadError(fmt::format("{}: alignment covers {:.3f} s, audio is {:.3f} s", utt.id,
                                     it->second.duration, utt.Duration()));
        }
        items[i].id = utt.id;
        items[i].labels = LabelsFromTrack(it->second, fp,
                                          static_cast<int64_t>(utt.samples.size()),
                                          utt.sample_rate);
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    }
    std::vector<LabeledId> good;
    int64_t frames = 0, speech = 0;
    for (size_t i = 0; i < files.size(); ++i) {
      if (!errs[i].empty()) {
        errors.push_back(errs[i]);
        log.Error("label_failed", {{"file", files[i].string()}, {"error", errs[i]}});
        continue;
      }
      frames += static_cast<int64_t>(items[i].labels.size());
      speech += static_cast<int64_t>(items[i].labels.NumSpeech());
      good.push_back(std::move(items[i]));
    }
    WriteLabelFile((out / (std::string(SplitName(split)) + ".lab")).string(), good);
    splits[std::string(SplitName(split))] = {{"utterances", good.size()},
                                             {"frames", frames},
                                             {"silence_fraction", SilenceFraction(frames, speech)}};
    total_frames += frames;
    total_speech += speech;
    total_utts += static_cast<int64_t>(good.size());
  }
  Json ssr = {{"splits", splits},
              {"utterances", total_utts},
              {"frames", total_frames},
              {"silence_fraction", SilenceFraction(total_frames, total_speech)}};
  WriteFileAtomic((out / "ssr.json").string(), ssr.dump(2) + "\n");
  res.summary = {{"utterances", total_utts},
                 {"frames", total_frames},
                 {"silence_fraction", SilenceFraction(total_frames, total_speech)},
                 {"errors", errors.size()}};
  if (!errors.empty()) {
    res.summary["first_errors"] = ErrorList(errors);
    res.exit_code = 1;
  }
  return res;
}

// ------------------------------------------------------------------ concat

CommandResult RunConcat(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const fs::path clean(cfg.Str("clean_dir"));
  const fs::path labels_dir(cfg.Str("labels_dir"));
  const fs::path out(cfg.Str("out_dir"));
  const bool enabled = cfg.Bool("concat");
  ConcatSpec spec;
  spec.silence_ratio = cfg.Double("silence_ratio");
  if (!(spec.silence_ratio >= 0.0)) throw VadError("silence_ratio must be >= 0");

  int64_t in_frames = 0, in_speech = 0, out_frames = 0, out_speech = 0;
  int64_t inputs = 0, outputs = 0, dropped = 0;
  std::string manifest;
  for (Split split : PresentSplits(clean)) {
    const std::string sname(SplitName(split));
    const auto files = ListAudio(clean / sname);
    const auto labels = ReadSplitLabels(labels_dir, split);
    std::vector<Utterance> utts(files.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(files.size()); ++i) {
      utts[i] = ReadAudio(files[i].string());
    }
    std::map<std::string, size_t> index;
    std::vector<std::string> ids;
    for (size_t i = 0; i < utts.size(); ++i) {
      if (!labels.count(utts[i].id)) throw VadError("concat: no labels for " + utts[i].id);
      const auto& l = labels.at(utts[i].id);
      in_frames += static_cast<int64_t>(l.size());
      in_speech += static_cast<int64_t>(l.NumSpeech());
      index[utts[i].id] = i;
      ids.push_back(utts[i].id);
    }
    inputs += static_cast<int64_t>(ids.size());
    std::vector<LabeledId> out_labels;

    if (!enabled) {
      for (const auto& u : utts) {
        WriteWav((out / sname / (u.id + ".wav")).string(), u.samples, u.sample_rate);
        out_labels.push_back({u.id, labels.at(u.id)});
        out_frames += static_cast<int64_t>(labels.at(u.id).size());
        out_speech += static_cast<int64_t>(labels.at(u.id).NumSpeech());
      }
      outputs += static_cast<int64_t>(utts.size());
      WriteLabelFile((out / (sname + ".lab")).string(), out_labels);
      continue;
    }

    std::vector<std::vector<float>> segments;
    for (const auto& u : utts) {
      auto segs = ExtractSilence(u, labels.at(u.id));
      for (auto& s : segs) segments.push_back(std::move(s));
    }
    const SilencePool pool(segments);
    const auto pairs = PairUtterances(ids);
    dropped += static_cast<int64_t>(ids.size() - 2 * pairs.size());
    std::vector<int64_t> cursors(pairs.size(), 0);
    int64_t cursor = 0;
    for (size_t p = 0; p < pairs.size(); ++p) {
      cursors[p] = cursor;
      cursor += InsertedSamples(
          static_cast<int64_t>(utts[index[pairs[p].first]].samples.size()),
          static_cast<int64_t>(utts[index[pairs[p].second]].samples.size()), spec);
    }
    std::vector<ConcatResult> built(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t p = 0; p < static_cast<int64_t>(pairs.size()); ++p) {
      const auto& a = utts[index[pairs[p].first]];
      const auto& b = utts[index[pairs[p].second]];
      SilencePool local = pool.WithCursor(cursors[p]);
      built[p] = BuildConcat(a, b, labels.at(a.id), labels.at(b.id), local, spec);
      WriteWav((out / sname / (built[p].utterance.id + ".wav")).string(),
               built[p].utterance.samples, built[p].utterance.sample_rate);
    }
    for (size_t p = 0; p < pairs.size(); ++p) {
      const auto& r = built[p];
      out_labels.push_back({r.utterance.id, r.labels});
      out_frames += static_cast<int64_t>(r.labels.size());
      out_speech += static_cast<int64_t>(r.labels.NumSpeech());
      Json m = {{"id", r.utterance.id},
                {"split", sname},
                {"first", pairs[p].first},
                {"second", pairs[p].second},
                {"speakers", {SpeakerOf(pairs[p].first), SpeakerOf(pairs[p].second)}},
                {"inserted_samples", r.inserted_samples},
                {"pool_cursor", r.pool_cursor}};
      manifest += m.dump() + "\n";
    }
    if (ids.size() % 2 == 1) {
      log.Warn("odd_count_dropped", {{"split", sname}, {"dropped", ids.back()}});
    }
    outputs += static_cast<int64_t>(pairs.size());
    WriteLabelFile((out / (sname + ".lab")).string(), out_labels);
  }
  if (enabled) WriteFileAtomic((out / "concat_manifest.jsonl").string(), manifest);
  res.summary = {{"inputs", inputs},
                 {"outputs", outputs},
                 {"dropped", dropped},
                 {"silence_fraction_in", SilenceFraction(in_frames, in_speech)},
                 {"silence_fraction_out", SilenceFraction(out_frames, out_speech)}};
  return res;
}

// --------------------------------------------------------------- gen-noise

std::vector<SpeakerAudio> LoadSpeakers(const fs::path& dir) {
  std::vector<SpeakerAudio> out;
  for (const auto& d : ListDirs(dir)) {
    SpeakerAudio s;
    s.speaker_id = d.filename().string();
    const auto files = ListAudio(d);
    s.utterances.resize(files.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(files.size()); ++i) {
      s.utterances[i] = ReadAudio(files[i].string());
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw VadError("no speaker directories under " + dir.string());
  return out;
}

SelectionCriteria CriteriaFrom(const RunConfig& cfg) {
  SelectionCriteria c;
  c.min_snr_db = cfg.Double("min_snr_db");
  c.min_speech_fraction = cfg.Double("min_speech_fraction");
  c.min_speech_seconds = cfg.Double("min_speech_seconds");
  return c;
}

std::array<double, 3> ThreeDoubles(const RunConfig& cfg, const std::string& key) {
  const auto v = cfg.DoubleList(key);
  if (v.size() != 3) throw VadError(key + ": expected train,val,test values");
  return {v[0], v[1], v[2]};
}

std::array<int, 3> ThreeInts(const RunConfig& cfg, const std::string& key) {
  const auto v = cfg.IntList(key);
  if (v.size() != 3) throw VadError(key + ": expected train,val,test values");
  return {v[0], v[1], v[2]};
}

void WriteSplits(const fs::path& dir, const std::map<Split, SplitAudio>& splits) {
  for (const auto& [split, sa] : splits) {
    const std::string name(SplitName(split));
    WriteWav((dir / (name + ".wav")).string(), sa.audio);
    WriteFileAtomic((dir / (name + ".json")).string(), ProvenanceToJson(sa.provenance) + "\n");
  }
}

std::vector<SpeakerSelection> Screen(const std::vector<SpeakerAudio>& speakers,
                                     const RunConfig& cfg, const fs::path& report,
                                     Logger& log) {
  const auto criteria = CriteriaFrom(cfg);
  std::vector<SpeakerSelection> all(speakers.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(speakers.size()); ++i) {
    all[i] = EvaluateSpeaker(speakers[i], criteria);
  }
  std::string lines;
  std::vector<SpeakerSelection> accepted;
  for (const auto& s : all) {
    Json j = {{"speaker", s.speaker_id},
              {"est_snr_db", s.est_snr_db},
              {"speech_fraction", s.speech_fraction},
              {"speech_seconds", s.speech_seconds},
              {"accepted", s.accepted},
              {"kept_utterances", s.kept_utterances}};
    lines += j.dump() + "\n";
    if (s.accepted) accepted.push_back(s);
  }
  WriteFileAtomic(report.string(), lines);
  log.Info("speaker_screening", {{"speakers", all.size()}, {"accepted", accepted.size()}});
  return accepted;
}

std::vector<Utterance> KeptUtterances(const SpeakerAudio& spk, const SpeakerSelection& sel) {
  const std::set<std::string> keep(sel.kept_utterances.begin(), sel.kept_utterances.end());
  std::vector<Utterance> out;
  for (const auto& u : spk.utterances) {
    if (keep.count(u.id)) out.push_back(u);
  }
  return out;
}

CommandResult RunGenNoise(const std::string& mode, const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const fs::path out(cfg.Str("out_dir"));
  const uint64_t seed = cfg.Uint64("master_seed");
  res.summary["mode"] = mode;
  if (mode == "ssn" || mode == "babble") {
    if (!cfg.Has("speakers_dir")) throw VadError("speakers_dir: required for gen-noise " + mode);
    const auto speakers = LoadSpeakers(cfg.Str("speakers_dir"));
    std::map<std::string, const SpeakerAudio*> by_id;
    for (const auto& s : speakers) by_id[s.speaker_id] = &s;
    const std::string type_name = mode == "ssn" ? "SSN" : "Babble";
    const fs::path dir = out / type_name;
    const auto accepted = Screen(speakers, cfg, dir / "selection.jsonl", log);
    std::map<Split, SplitAudio> splits;
    if (mode == "ssn") {
      const auto n = ThreeInts(cfg, "ssn_sources");
      const auto secs = ThreeDoubles(cfg, "ssn_seconds");
      SsnSplitPlan plan;
      plan.train = {n[0], secs[0]};
      plan.val = {n[1], secs[1]};
      plan.test = {n[2], secs[2]};
      const size_t need = static_cast<size_t>(std::min<int>(
          plan.TotalSources(), static_cast<int>(accepted.size())));
      std::vector<LpcFilter> filters(need);
      std::vector<std::string> ids(need);
      const int order = cfg.Int("lpc_order");
#pragma omp parallel for schedule(dynamic)
      for (int64_t i = 0; i < static_cast<int64_t>(need); ++i) {
        std::vector<float> joined;
        for (const auto& u : KeptUtterances(*by_id.at(accepted[i].speaker_id), accepted[i])) {
          joined.insert(joined.end(), u.samples.begin(), u.samples.end());
        }
        filters[i] = LpcFit(joined, order);
        ids[i] = accepted[i].speaker_id;
      }
      splits = AssembleSsnSplits(filters, ids, plan, DeriveSeed(seed, "ssn"));
    } else {
      const auto n = ThreeInts(cfg, "babble_speakers");
      const auto secs = ThreeDoubles(cfg, "noise_seconds");
      BabbleSplitPlan plan;
      plan.train_speakers = n[0];
      plan.val_speakers = n[1];
      plan.test_speakers = n[2];
      plan.durations = {secs[0], secs[1], secs[2]};
      std::vector<SpeakerAudio> stripped(accepted.size());
#pragma omp parallel for schedule(dynamic)
      for (int64_t i = 0; i < static_cast<int64_t>(accepted.size()); ++i) {
        stripped[i].speaker_id = accepted[i].speaker_id;
        for (auto& u : KeptUtterances(*by_id.at(accepted[i].speaker_id), accepted[i])) {
          const auto vad = EnergyVad(u.samples);
          u.samples = RemoveSilence(u.samples, vad);
          stripped[i].utterances.push_back(std::move(u));
        }
      }
      splits = AssembleBabbleSplits(stripped, plan, DeriveSeed(seed, "babble"));
    }
    WriteSplits(dir, splits);
    res.summary["noise_type"] = type_name;
    res.summary["accepted_speakers"] = accepted.size();
  } else if (mode == "assemble") {
    if (!cfg.Has("recordings_dir")) throw VadError("recordings_dir: required for gen-noise assemble");
    const auto secs = ThreeDoubles(cfg, "noise_seconds");
    const DurationPlan plan{secs[0], secs[1], secs[2]};
    Json types = Json::array();
    for (const auto& d : ListDirs(cfg.Str("recordings_dir"))) {
      const auto type = ParseNoiseType(d.filename().string());
      if (!type || *type == NoiseType::kBabble || *type == NoiseType::kSsn) {
        throw VadError("recordings_dir: '" + d.filename().string() +
                       "' is not a recorded noise type");
      }
      std::map<Split, SplitAudio> splits;
      for (Split split : kAllSplits) {
        const auto sdir = d / std::string(SplitName(split));
        if (!fs::is_directory(sdir)) {
          throw VadError("missing noise split " + sdir.string());
        }
        std::vector<std::vector<float>> recs;
        SplitAudio sa;
        for (const auto& f : ListAudio(sdir)) {
          recs.push_back(ReadAudio(f.string()).samples);
          sa.provenance.sources.push_back(f.filename().string());
        }
        sa.audio = ConcatenateToDuration(recs, plan.For(split));
        sa.provenance.type = *type;
        sa.provenance.split = split;
        sa.provenance.seconds = plan.For(split);
        splits.emplace(split, std::move(sa));
      }
      WriteSplits(out / d.filename(), splits);
      types.push_back(d.filename().string());
    }
    res.summary["noise_types"] = types;
  } else {
    throw VadError("gen-noise: mode must be ssn, babble or assemble (got '" + mode + "')");
  }
  return res;
}

// --------------------------------------------------------------------- mix

CommandResult RunMix(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const fs::path clean(cfg.Str("clean_dir"));
  const fs::path labels_dir(cfg.Str("labels_dir"));
  const fs::path noise_dir(cfg.Str("noise_dir"));
  DatasetConfig dc;
  dc.snr_levels = cfg.IntList("snr_levels");
  dc.noise_types = cfg.NoiseList("noise_types");
  dc.master_seed = cfg.Uint64("master_seed");
  dc.out_dir = cfg.Str("out_dir");
  dc.resume = cfg.Bool("resume");
  dc.workers = WorkersFromEnv();
  dc.on_entry = [&log](const ManifestEntry& e, double seconds) {
    log.Log(LogLevel::kDebug, "entry",
            {{"output", e.output_path}, {"seconds", seconds}, {"snr", e.achieved_snr_db}});
  };

  std::vector<CleanItem> items;
  const auto splits = PresentSplits(clean);
  for (Split split : splits) {
    const auto labels = ReadSplitLabels(labels_dir, split);
    for (const auto& f : ListAudio(clean / std::string(SplitName(split)))) {
      const std::string id = f.stem().string();
      const auto it = labels.find(id);
      if (it == labels.end()) throw VadError("mix: no labels for " + id);
      items.push_back({id, split, f.string(), it->second});
    }
  }
  std::vector<NoiseSource> noises;
  for (NoiseType t : dc.noise_types) {
    for (Split split : splits) {
      const auto path = noise_dir / std::string(NoiseTypeName(t)) /
                        (std::string(SplitName(split)) + ".wav");
      if (!fs::exists(path)) throw VadError("mix: missing noise split " + path.string());
      noises.push_back({t, split, ReadAudio(path.string()).samples});
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = GenerateDataset(items, noises, dc);
  for (const auto& e : result.errors) {
    log.Error("entry_failed", {{"output", e.output_path}, {"error", e.message}});
  }
  res.summary = {{"clean", items.size()},
                 {"entries", result.entries.size()},
                 {"written", result.written},
                 {"skipped", result.skipped},
                 {"errors", result.errors.size()},
                 {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                 {"manifest", (fs::path(dc.out_dir) / "manifest.jsonl").string()}};
  if (!result.errors.empty()) res.exit_code = 1;
  return res;
}

// --------------------------------------------------------------- subsample

CommandResult RunSubsample(const RunConfig& cfg, Logger&) {
  CommandResult res;
  const auto entries = ReadManifestFile(cfg.Str("manifest"));
  std::set<std::string> distinct;
  for (const auto& e : entries) distinct.insert(e.clean_id);
  const std::vector<std::string> sorted(distinct.begin(), distinct.end());
  const auto kept = Subsample(sorted, cfg.Int("stride"));
  const std::set<std::string> keep(kept.begin(), kept.end());
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (keep.count(e.clean_id)) out.push_back(e);
  }
  const auto path = fs::path(cfg.Str("out_dir")) / "manifest.jsonl";
  WriteManifestFile(path.string(), out);
  res.summary = {{"clean_in", sorted.size()},
                 {"clean_out", kept.size()},
                 {"entries", out.size()},
                 {"manifest", path.string()}};
  return res;
}

// ---------------------------------------------------------------- features

CommandResult RunFeatures(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const auto entries = ReadManifestFile(cfg.Str("manifest"));
  const fs::path data = DataDir(cfg);
  const fs::path out(cfg.Str("out_dir"));
  const auto kind = *ParseFeatureKind(cfg.Str("feature_kind"));
  const auto opts =
      kind == FeatureKind::kMfcc ? FeatureOptions::Mfcc() : FeatureOptions::Gfcc(cfg.Int("gt_filters"));
  opts.Validate();
  const bool resume = cfg.Bool("resume");
  std::vector<std::string> errs(entries.size());
  int64_t frames = 0, skipped = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : frames, skipped)
  for (int64_t i = 0; i < static_cast<int64_t>(entries.size()); ++i) {
    const auto& e = entries[i];
    try {
      const auto path = FeaturePath(out, e);
      if (resume && fs::exists(path)) {
        ++skipped;
        continue;
      }
      const auto audio = ReadAudio((data / e.output_path).string());
      const auto fm = ComputeFeatures(audio.samples, opts, audio.sample_rate);
      const auto labels = EntryLabels(data, e);
      if (static_cast<int64_t>(labels.size()) != fm.frames()) {
        throw VadError(fmt::format("{}: {} feature frames but {} labels", e.output_path,
                                   fm.frames(), labels.size()));
      }
      Json meta = {{"id", EntryId(e)},
                   {"source", e.output_path},
                   {"kind", FeatureKindName(kind)},
                   {"frames", fm.frames()},
                   {"dims", fm.dims()},
                   {"num_filters", opts.num_filters}};
      WriteFeatureFile(path.string(), fm, meta.dump());
      frames += fm.frames();
    } catch (const std::exception& ex) {
      errs[i] = ex.what();
    }
  }
  int64_t failed = 0;
  for (size_t i = 0; i < errs.size(); ++i) {
    if (errs[i].empty()) continue;
    ++failed;
    log.Error("entry_failed", {{"output", entries[i].output_path}, {"error", errs[i]}});
  }
  res.summary = {{"entries", entries.size()},
                 {"frames", frames},
                 {"skipped", skipped},
                 {"errors", failed},
                 {"kind", FeatureKindName(kind)}};
  if (failed > 0) res.exit_code = 1;
  return res;
}

// ------------------------------------------------------------------ train

std::vector<TrainingUtterance> LoadTraining(const std::vector<ManifestEntry>& entries,
                                            const fs::path& data, const fs::path& features) {
  std::vector<TrainingUtterance> out(entries.size());
  std::vector<std::string> errs(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(entries.size()); ++i) {
    try {
      out[i].id = EntryId(entries[i]);
      out[i].features = ToFloat(ReadFeatureFile(FeaturePath(features, entries[i]).string()).values);
      out[i].labels = EntryLabels(data, entries[i]);
      if (static_cast<int64_t>(out[i].labels.size()) != out[i].features.rows()) {
        throw VadError(out[i].id + ": feature and label lengths differ");
      }
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  }
  for (const auto& e : errs) {
    if (!e.empty()) throw VadError("train data: " + e);
  }
  return out;
}

std::vector<ManifestEntry> EntriesForSplit(const RunConfig& cfg, const std::string& key) {
  const auto split = *ParseSplit(cfg.Str(key));
  std::vector<ManifestEntry> out;
  for (auto& e : ReadManifestFile(cfg.Str("manifest"))) {
    if (e.split == split) out.push_back(std::move(e));
  }
  return out;
}

CommandResult RunTrain(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  const auto entries = EntriesForSplit(cfg, "train_split");
  if (entries.empty()) throw VadError("train-bdnn: no entries in split " + cfg.Str("train_split"));
  const auto data = LoadTraining(entries, DataDir(cfg), cfg.Str("features_dir"));
  ContextSpec ctx{cfg.Int("context_left"), cfg.Int("context_right")};
  ctx.Validate();
  const int dims = static_cast<int>(data.front().features.cols());
  const uint64_t seed = cfg.Uint64("master_seed");
  TrainConfig tc;
  tc.learning_rate = cfg.Double("learning_rate");
  tc.batch_size = cfg.Int("batch_size");
  tc.max_epochs = cfg.Int("max_epochs");
  tc.seed = DeriveSeed(seed, "bdnn/train");
  tc.Validate();
  auto model = BdnnModel::Init(BdnnLayerSizes(ctx, dims, cfg.Int("hidden_units")),
                               DeriveSeed(seed, "bdnn/init"));
  int64_t frames = 0;
  for (const auto& u : data) frames += u.features.rows();
  log.Info("train_start", {{"utterances", data.size()},
                           {"frames", frames},
                           {"parameters", model.NumParameters()},
                           {"epochs", tc.max_epochs}});
  auto t0 = std::chrono::steady_clock::now();
  const auto stats = TrainBdnn(model, data, ctx, tc, [&](int epoch, double loss) {
    const auto now = std::chrono::steady_clock::now();
    log.Info("epoch", {{"epoch", epoch}, {"loss", loss},
                       {"seconds", std::chrono::duration<double>(now - t0).count()}});
    t0 = now;
  });
  CheckpointMeta meta;
  meta.context = ctx;
  meta.feature_dims = dims;
  meta.train = tc;
  meta.epochs_run = stats.epochs_run;
  meta.train_loss = stats.epoch_loss;
  const auto path = fs::path(cfg.Str("out_dir")) / "model.vkbd";
  WriteCheckpoint(path.string(), model, meta);
  res.summary = {{"model", path.string()},
                 {"epochs", stats.epochs_run},
                 {"frames", frames},
                 {"final_loss", stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back()}};
  return res;
}

// ------------------------------------------------------------------ score

CommandResult RunScore(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  CheckpointMeta meta;
  const auto model = ReadCheckpoint(cfg.Str("model"), &meta);
  const auto entries = EntriesForSplit(cfg, "score_split");
  const fs::path features(cfg.Str("features_dir"));
  std::vector<ScoreLine> lines(entries.size());
  std::vector<std::string> errs(entries.size());
  int64_t frames = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : frames)
  for (int64_t i = 0; i < static_cast<int64_t>(entries.size()); ++i) {
    try {
      const auto fm = ReadFeatureFile(FeaturePath(features, entries[i]).string());
      lines[i].id = EntryId(entries[i]);
      lines[i].posteriors = PredictFrames(model, ToFloat(fm.values), meta.context);
      frames += fm.frames();
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  }
  std::vector<ScoreLine> good;
  int64_t failed = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!errs[i].empty()) {
      ++failed;
      log.Error("entry_failed", {{"output", entries[i].output_path}, {"error", errs[i]}});
      continue;
    }
    good.push_back(std::move(lines[i]));
  }
  const auto path = fs::path(cfg.Str("out_dir")) / "scores.txt";
  WriteScoreFile(path.string(), good);
  res.summary = {{"scores", path.string()},
                 {"utterances", good.size()},
                 {"frames", frames},
                 {"errors", failed}};
  if (failed > 0) res.exit_code = 1;
  return res;
}

// -------------------------------------------------------------- eval / det

struct Scored {
  std::vector<Condition> conditions;  // manifest mode
  ScoreSet pooled;                    // label-file mode
  bool by_condition = false;
};

Scored LoadScored(const RunConfig& cfg) {
  const auto scores = ReadScoreFile(cfg.Str("scores"));
  Scored out;
  if (cfg.Has("manifest")) {
    out.by_condition = true;
    const fs::path data = DataDir(cfg);
    std::map<std::string, ManifestEntry> by_id;
    for (auto& e : ReadManifestFile(cfg.Str("manifest"))) by_id[EntryId(e)] = std::move(e);
    std::map<std::pair<NoiseType, int>, size_t> index;
    for (const auto& s : scores) {
      const auto it = by_id.find(s.id);
      if (it == by_id.end()) throw VadError("eval: " + s.id + " is not in the manifest");
      const auto labels = EntryLabels(data, it->second);
      if (labels.size() != s.posteriors.size()) {
        throw VadError(fmt::format("eval: {} has {} scores but {} labels", s.id,
                                   s.posteriors.size(), labels.size()));
      }
      const auto key = std::make_pair(it->second.noise_type, it->second.snr_db);
      auto [pos, inserted] = index.emplace(key, out.conditions.size());
      if (inserted) out.conditions.push_back({key.first, key.second, {}});
      auto& set = out.conditions[pos->second].set;
      set.scores.insert(set.scores.end(), s.posteriors.begin(), s.posteriors.end());
      set.labels.insert(set.labels.end(), labels.labels.begin(), labels.labels.end());
    }
  } else if (cfg.Has("labels")) {
    std::vector<std::pair<std::string, std::vector<double>>> pairs;
    for (const auto& s : scores) pairs.emplace_back(s.id, s.posteriors);
    out.pooled = JoinScores(pairs, ReadLabelFile(cfg.Str("labels")));
  } else {
    throw VadError("eval: set manifest (with data_dir) or labels");
  }
  return out;
}

CommandResult RunEval(const RunConfig& cfg, Logger& log, bool det_only) {
  CommandResult res;
  const fs::path out(cfg.Str("out_dir"));
  const bool normalize = !det_only && cfg.Bool("normalize_dcf");
  const auto scored = LoadScored(cfg);
  if (scored.by_condition) {
    const auto report = Aggregate(scored.conditions, DcfParams(), normalize);
    for (const auto& w : report.warnings) log.Warn("aggregate", {{"message", w}});
    if (report.pooled_det.empty()) throw VadError("eval: no condition has both classes");
    WriteFileAtomic((out / "det.csv").string(), DetCsv(report.pooled_det));
    if (!det_only) {
      WriteFileAtomic((out / "report.csv").string(), ReportCsv(report));
      WriteFileAtomic((out / "summary.csv").string(), ReportSummaryCsv(report));
    }
    res.summary = {{"conditions", scored.conditions.size()},
                   {"frames", report.pooled_frames},
                   {"pooled_auc", report.pooled_auc},
                   {"pooled_eer", report.pooled_eer},
                   {"pooled_min_dcf", report.pooled_min_dcf},
                   {"average_auc", report.overall.value_or(0.0)}};
  } else {
    const auto& set = scored.pooled;
    const auto det = DetPoints(set);
    WriteFileAtomic((out / "det.csv").string(), DetCsv(det));
    const double auc = RocAuc(set), eer = Eer(set), dcf = MinDcf(set, DcfParams(), normalize);
    if (!det_only) {
      WriteFileAtomic((out / "summary.csv").string(),
                      fmt::format("metric,value\npooled_auc,{:.6f}\npooled_eer,{:.6f}\n"
                                  "pooled_min_dcf,{:.6f}\npooled_frames,{}\n",
                                  auc, eer, dcf, set.size()));
    }
    res.summary = {{"frames", set.size()},
                   {"pooled_auc", auc},
                   {"pooled_eer", eer},
                   {"pooled_min_dcf", dcf}};
  }
  res.summary["det_points"] = (out / "det.csv").string();
  return res;
}

// ------------------------------------------------------ convert-alignments

CommandResult RunConvert(const RunConfig& cfg, Logger& log) {
  CommandResult res;
  std::ifstream is(cfg.Str("input"));
  if (!is) throw VadError("cannot open " + cfg.Str("input"));
  std::string line, out;
  std::vector<std::string> errors;
  int number = 0, converted = 0;
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out += AlignmentToJson(ConvertLibriSpeechAlignmentLine(line, number)) + "\n";
      ++converted;
    } catch (const std::exception& e) {
      errors.push_back(e.what());
      log.Error("line_failed", {{"line", number}, {"error", e.what()}});
    }
  }
  const auto path = fs::path(cfg.Str("out_dir")) / "alignments.jsonl";
  WriteFileAtomic(path.string(), out);
  res.summary = {{"converted", converted}, {"errors", errors.size()}, {"output", path.string()}};
  if (!errors.empty()) {
    res.summary["first_errors"] = ErrorList(errors);
    res.exit_code = 1;
  }
  return res;
}

}  // namespace

CommandResult RunCommand(const std::string& name, const std::string& mode,
                         const RunConfig& config, Logger& log) {
  const CommandSpec* spec = FindCommand(name);
  if (spec == nullptr) throw VadError("unknown command " + name);
  SetWorkers(WorkersFromEnv());
  const fs::path out(config.Str("out_dir"));
  fs::create_directories(out);
  const std::string cfg_name = name + (mode.empty() ? "" : "-" + mode) + ".config";
  WriteFileAtomic((out / cfg_name).string(), config.Dump(spec->keys));

  const auto t0 = std::chrono::steady_clock::now();
  CommandResult res;
  if (name == "labels") res = RunLabels(config, log);
  else if (name == "concat") res = RunConcat(config, log);
  else if (name == "gen-noise") res = RunGenNoise(mode, config, log);
  else if (name == "mix") res = RunMix(config, log);
  else if (name == "subsample") res = RunSubsample(config, log);
  else if (name == "features") res = RunFeatures(config, log);
  else if (name == "train-bdnn") res = RunTrain(config, log);
  else if (name == "score") res = RunScore(config, log);
  else if (name == "eval") res = RunEval(config, log, false);
  else if (name == "det") res = RunEval(config, log, true);
  else if (name == "convert-alignments") res = RunConvert(config, log);

  Json summary;
  summary["status"] = res.exit_code == 0 ? "ok" : "partial";
  summary["command"] = name;
  if (!mode.empty()) summary["mode"] = mode;
  for (auto& [k, v] : res.summary.items()) summary[k] = v;
  summary["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.summary = std::move(summary);
  return res;
}

}  // namespace vadkit

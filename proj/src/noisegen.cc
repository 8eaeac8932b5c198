// vadkit/noisegen.cc

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

#include "vadkit/noisegen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "json.hpp"

namespace vadkit {

namespace {

std::vector<double> HammingWindow(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

struct AutocorrLayout {
  int frame_len = 0;
  int hop = 0;
  int64_t frames = 0;
};

AutocorrLayout Layout(std::span<const float> audio, int max_lag,
                      const LpcOptions& opts, int rate) {
  AutocorrLayout l;
  l.frame_len = static_cast<int>(std::lround(opts.frame_seconds * rate));
  l.hop = static_cast<int>(std::lround(opts.hop_seconds * rate));
  if (l.frame_len <= max_lag || l.hop <= 0) {
    throw VadError("lpc: analysis frame must be longer than the order");
  }
  const int64_t len = static_cast<int64_t>(audio.size());
  l.frames = len < l.frame_len ? 0 : 1 + (len - l.frame_len) / l.hop;
  if (l.frames == 0) throw VadError("lpc: audio shorter than one analysis frame");
  return l;
}

void FrameAutocorr(std::span<const float> audio, const std::vector<double>& win,
                   int64_t start, int max_lag, std::vector<double>& buf,
                   double* out) {
  const int n = static_cast<int>(win.size());
  for (int i = 0; i < n; ++i) buf[i] = win[i] * audio[start + i];
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (int i = 0; i + k < n; ++i) acc += buf[i] * buf[i + k];
    out[k] = acc;
  }
}

std::vector<double> Normalise(std::vector<double> r, const std::vector<double>& win,
                              int64_t frames) {
  double wenergy = 0.0;
  for (double w : win) wenergy += w * w;
  for (double& v : r) v /= wenergy * static_cast<double>(frames);
  return r;
}

// Replaces runs of `value` shorter than `min_len`. When `interior_only`
// is set, runs touching either end are kept.
void FillShortRuns(std::vector<uint8_t>& labels, uint8_t value, int64_t min_len,
                   bool interior_only) {
  const size_t n = labels.size();
  size_t i = 0;
  while (i < n) {
    if (labels[i] != value) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && labels[j] == value) ++j;
    const bool interior = i > 0 && j < n;
    if (static_cast<int64_t>(j - i) < min_len && (interior || !interior_only)) {
      std::fill(labels.begin() + i, labels.begin() + j, static_cast<uint8_t>(!value));
    }
    i = j;
  }
}

double FramePower(std::span<const float> audio, int64_t start, int len) {
  double acc = 0.0;
  for (int i = 0; i < len; ++i) {
    const double x = audio[start + i];
    acc += x * x;
  }
  return acc / len;
}

}  // namespace

double Rms(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> AveragedAutocorrelation(std::span<const float> audio,
                                            int max_lag, const LpcOptions& opts,
                                            int rate) {
  const auto layout = Layout(audio, max_lag, opts, rate);
  const auto win = HammingWindow(layout.frame_len);
  const size_t lags = static_cast<size_t>(max_lag) + 1;
  std::vector<double> per_frame(static_cast<size_t>(layout.frames) * lags);
#pragma omp parallel
  {
    std::vector<double> buf(win.size());
#pragma omp for schedule(static)
    for (int64_t f = 0; f < layout.frames; ++f) {
      FrameAutocorr(audio, win, f * layout.hop, max_lag, buf,
                    per_frame.data() + f * lags);
    }
  }
  std::vector<double> r(lags, 0.0);
  for (int64_t f = 0; f < layout.frames; ++f) {
    for (size_t k = 0; k < lags; ++k) r[k] += per_frame[f * lags + k];
  }
  return Normalise(std::move(r), win, layout.frames);
}

std::vector<double> AveragedAutocorrelationSerial(std::span<const float> audio,
                                                  int max_lag,
                                                  const LpcOptions& opts,
                                                  int rate) {
  const auto layout = Layout(audio, max_lag, opts, rate);
  const auto win = HammingWindow(layout.frame_len);
  const size_t lags = static_cast<size_t>(max_lag) + 1;
  std::vector<double> buf(win.size()), frame(lags), r(lags, 0.0);
  for (int64_t f = 0; f < layout.frames; ++f) {
    FrameAutocorr(audio, win, f * layout.hop, max_lag, buf, frame.data());
    for (size_t k = 0; k < lags; ++k) r[k] += frame[k];
  }
  return Normalise(std::move(r), win, layout.frames);
}

LevinsonResult LevinsonDurbin(std::span<const double> r, int order) {
  if (order < 0 || static_cast<int>(r.size()) < order + 1) {
    throw VadError("levinson: need order+1 autocorrelation lags");
  }
  if (!(r[0] > 0.0)) throw VadError("levinson: zero-energy autocorrelation");
  LevinsonResult res;
  res.a.assign(static_cast<size_t>(order), 0.0);
  res.reflection.assign(static_cast<size_t>(order), 0.0);
  std::vector<double> prev(static_cast<size_t>(order), 0.0);
  double err = r[0];
  for (int i = 0; i < order; ++i) {
    double acc = r[i + 1];
    for (int j = 0; j < i; ++j) acc += res.a[j] * r[i - j];
    const double k = -acc / err;
    res.reflection[i] = k;
    prev = res.a;
    for (int j = 0; j < i; ++j) res.a[j] = prev[j] + k * prev[i - 1 - j];
    res.a[i] = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0)) break;
  }
  res.error = err;
  return res;
}

bool IsStable(const LpcFilter& filter) {
  return std::all_of(filter.reflection.begin(), filter.reflection.end(),
                     [](double k) { return std::abs(k) < 1.0; });
}

LpcFilter LpcFit(std::span<const float> audio, int order, const LpcOptions& opts,
                 int rate) {
  if (order < 0) throw VadError("lpc: negative order");
  const auto r = AveragedAutocorrelation(audio, order, opts, rate);
  if (!(r[0] > 0.0)) throw VadError("lpc: zero-energy input");
  const auto lev = LevinsonDurbin(r, order);
  LpcFilter f;
  f.order = order;
  f.a = lev.a;
  f.reflection = lev.reflection;
  if (!IsStable(f) || !(lev.error > 0.0)) {
    throw VadError("lpc: fitted filter is unstable");
  }
  f.gain = std::sqrt(lev.error);
  return f;
}

std::vector<float> SynthSsn(const LpcFilter& filter, double duration_seconds,
                            uint64_t seed, int rate) {
  if (!IsStable(filter)) throw VadError("ssn: unstable filter");
  const int64_t n = std::llround(duration_seconds * rate);
  if (n <= 0) return {};
  constexpr int64_t kWarmup = 4096;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int p = filter.order;
  std::vector<double> hist(static_cast<size_t>(p), 0.0);  // y[n-1], y[n-2], ...
  std::vector<double> y(static_cast<size_t>(n));
  for (int64_t i = -kWarmup; i < n; ++i) {
    double v = filter.gain * gauss(rng);
    for (int k = 0; k < p; ++k) v -= filter.a[k] * hist[k];
    for (int k = p - 1; k > 0; --k) hist[k] = hist[k - 1];
    if (p > 0) hist[0] = v;
    if (i >= 0) y[i] = v;
  }
  double power = 0.0;
  for (double v : y) power += v * v;
  const double scale = kNoiseRms / std::sqrt(power / static_cast<double>(n));
  std::vector<float> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) out[i] = static_cast<float>(y[i] * scale);
  return out;
}

FrameLabels EnergyVad(std::span<const float> audio, const FrameParams& fp,
                      const EnergyVadOptions& opts, int rate) {
  if (audio.empty()) throw VadError("energy_vad: empty audio");
  fp.Validate();
  FrameLabels out;
  out.frame_params = fp;
  const int64_t frames = NumFrames(static_cast<int64_t>(audio.size()), fp, rate);
  if (frames == 0) return out;
  const int win = fp.WindowSamples(rate);
  const int hop = fp.HopSamples(rate);
  std::vector<double> energy(static_cast<size_t>(frames));
  for (int64_t i = 0; i < frames; ++i) {
    energy[i] = 10.0 * std::log10(FramePower(audio, i * hop, win) + 1e-10);
  }
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  const double pct = sorted[static_cast<size_t>(
      std::floor(opts.percentile * static_cast<double>(frames - 1)))];
  const double max_e = sorted.back();
  const bool degenerate = max_e - pct < opts.margin_db;
  const double threshold = degenerate ? -INFINITY : pct + opts.margin_db;

  out.labels.resize(static_cast<size_t>(frames));
  for (int64_t i = 0; i < frames; ++i) {
    out.labels[i] = energy[i] >= threshold && energy[i] > opts.absolute_floor_db;
  }
  const auto hop_s = fp.hop;
  FillShortRuns(out.labels, 0, std::llround(opts.min_gap_seconds / hop_s), true);
  FillShortRuns(out.labels, 1, std::llround(opts.min_speech_seconds / hop_s), false);
  return out;
}

double EstSnr(std::span<const float> audio, const FrameLabels& labels, int rate) {
  const auto& fp = labels.frame_params;
  const int win = fp.WindowSamples(rate);
  const int hop = fp.HopSamples(rate);
  if (static_cast<int64_t>(labels.size()) !=
      NumFrames(static_cast<int64_t>(audio.size()), fp, rate)) {
    throw VadError("est_snr: labels not aligned with audio");
  }
  double ps = 0.0, pn = 0.0;
  int64_t ns = 0, nn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double p = FramePower(audio, static_cast<int64_t>(i) * hop, win);
    if (labels.IsSpeech(i)) {
      ps += p;
      ++ns;
    } else {
      pn += p;
      ++nn;
    }
  }
  if (ns == 0 || nn == 0) throw VadError("cannot estimate SNR: one class missing");
  ps /= static_cast<double>(ns);
  pn /= static_cast<double>(nn);
  if (!(pn > 0.0)) return INFINITY;
  return 10.0 * std::log10(ps / pn);
}

std::vector<float> RemoveSilence(std::span<const float> audio,
                                 const FrameLabels& labels, int rate) {
  const auto& fp = labels.frame_params;
  const int hop = fp.HopSamples(rate);
  const int64_t len = static_cast<int64_t>(audio.size());
  std::vector<float> out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!labels.IsSpeech(i)) continue;
    const int64_t c = FrameCenterSample(static_cast<int64_t>(i), fp, rate);
    const int64_t b = std::max<int64_t>(0, c - hop / 2);
    const int64_t e = std::min<int64_t>(len, c - hop / 2 + hop);
    out.insert(out.end(), audio.begin() + b, audio.begin() + e);
  }
  return out;
}

SpeakerSelection EvaluateSpeaker(const SpeakerAudio& speaker,
                                 const SelectionCriteria& criteria,
                                 const FrameParams& fp) {
  SpeakerSelection sel;
  sel.speaker_id = speaker.speaker_id;
  double ps = 0.0, pn = 0.0;
  int64_t speech_frames = 0, total_frames = 0, nonspeech_frames = 0;
  for (const auto& utt : speaker.utterances) {
    const auto labels = EnergyVad(utt.samples, fp, EnergyVadOptions(), utt.sample_rate);
    if (labels.labels.empty()) continue;
    const size_t speech = labels.NumSpeech();
    const double fraction =
        static_cast<double>(speech) / static_cast<double>(labels.size());
    double snr = INFINITY;
    if (speech > 0 && speech < labels.size()) {
      snr = EstSnr(utt.samples, labels, utt.sample_rate);
    } else if (speech == 0) {
      continue;
    }
    if (!(snr > criteria.min_snr_db) || !(fraction > criteria.min_speech_fraction)) {
      continue;
    }
    sel.kept_utterances.push_back(utt.id);
    const int win = fp.WindowSamples(utt.sample_rate);
    const int hop = fp.HopSamples(utt.sample_rate);
    for (size_t i = 0; i < labels.size(); ++i) {
      const double p = FramePower(utt.samples, static_cast<int64_t>(i) * hop, win);
      if (labels.IsSpeech(i)) {
        ps += p;
      } else {
        pn += p;
        ++nonspeech_frames;
      }
    }
    speech_frames += static_cast<int64_t>(speech);
    total_frames += static_cast<int64_t>(labels.size());
  }
  if (total_frames > 0) {
    sel.speech_fraction =
        static_cast<double>(speech_frames) / static_cast<double>(total_frames);
    sel.speech_seconds = fp.hop * static_cast<double>(speech_frames);
    if (nonspeech_frames > 0 && pn > 0.0) {
      sel.est_snr_db = 10.0 * std::log10((ps / speech_frames) / (pn / nonspeech_frames));
    } else {
      sel.est_snr_db = INFINITY;
    }
  }
  sel.accepted = sel.est_snr_db > criteria.min_snr_db &&
                 sel.speech_fraction > criteria.min_speech_fraction &&
                 sel.speech_seconds > criteria.min_speech_seconds;
  return sel;
}

std::vector<SpeakerSelection> SelectSpeakers(std::span<const SpeakerAudio> speakers,
                                             const SelectionCriteria& criteria,
                                             const FrameParams& fp) {
  std::vector<SpeakerSelection> accepted;
  for (const auto& s : speakers) {
    auto sel = EvaluateSpeaker(s, criteria, fp);
    if (sel.accepted) accepted.push_back(std::move(sel));
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const auto& x, const auto& y) { return x.speaker_id < y.speaker_id; });
  return accepted;
}

BabbleResult BuildBabble(std::span<const SpeakerAudio> speakers,
                         const BabbleConfig& config, uint64_t seed) {
  const int streams = config.num_streams;
  if (streams < 1) throw VadError("babble: need at least one stream");
  if (static_cast<int>(speakers.size()) < streams) {
    throw VadError("babble: need at least " + std::to_string(streams) +
                   " speakers, have " + std::to_string(speakers.size()));
  }
  std::vector<size_t> order(speakers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return speakers[x].speaker_id < speakers[y].speaker_id;
  });
  BabbleResult res;
  if (config.assignment.empty()) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < order.size(); ++i) {
      res.assignment[speakers[order[i]].speaker_id] = static_cast<int>(i % streams);
    }
  } else {
    for (const auto& s : speakers) {
      auto it = config.assignment.find(s.speaker_id);
      if (it == config.assignment.end() || it->second < 0 || it->second >= streams) {
        throw VadError("babble: speaker " + s.speaker_id + " has no valid stream");
      }
    }
    res.assignment = config.assignment;
  }

  std::vector<std::vector<float>> stream_audio(static_cast<size_t>(streams));
  res.stream_utterances.resize(static_cast<size_t>(streams));
  for (size_t idx : order) {
    const auto& spk = speakers[idx];
    const int s = res.assignment.at(spk.speaker_id);
    for (const auto& utt : spk.utterances) {
      stream_audio[s].insert(stream_audio[s].end(), utt.samples.begin(),
                             utt.samples.end());
      res.stream_utterances[s].push_back(utt.id);
    }
  }
  size_t shortest = stream_audio[0].size();
  for (const auto& st : stream_audio) shortest = std::min(shortest, st.size());
  if (shortest == 0) throw VadError("babble: a stream has no audio");

  std::vector<double> mix(shortest, 0.0);
  for (auto& st : stream_audio) {
    st.resize(shortest);
    const double rms = Rms(st);
    if (!(rms > 0.0)) throw VadError("babble: a stream is silent");
    for (size_t i = 0; i < shortest; ++i) mix[i] += st[i] / rms;
  }
  double power = 0.0;
  for (double v : mix) power += v * v;
  res.pre_norm_rms = std::sqrt(power / static_cast<double>(shortest));
  const double scale = kNoiseRms / res.pre_norm_rms;
  res.audio.resize(shortest);
  for (size_t i = 0; i < shortest; ++i) res.audio[i] = static_cast<float>(mix[i] * scale);
  return res;
}

const SplitAllocation& SsnSplitPlan::For(Split split) const {
  switch (split) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

double DurationPlan::For(Split split) const {
  switch (split) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

std::string ProvenanceToJson(const NoiseProvenance& p) {
  nlohmann::ordered_json j;
  j["noise_type"] = NoiseTypeName(p.type);
  j["split"] = SplitName(p.split);
  j["sources"] = p.sources;
  j["seconds"] = p.seconds;
  j["seed"] = p.seed;
  return j.dump();
}

std::map<Split, SplitAudio> AssembleSsnSplits(std::span<const LpcFilter> filters,
                                              std::span<const std::string> filter_ids,
                                              const SsnSplitPlan& plan, uint64_t seed,
                                              int rate) {
  if (filters.size() != filter_ids.size()) {
    throw VadError("ssn splits: one id per filter required");
  }
  const int need = plan.TotalSources();
  if (need <= 0) throw VadError("ssn splits: plan uses no sources");
  if (static_cast<int>(filters.size()) < need) {
    throw VadError("ssn splits: plan needs " + std::to_string(need) +
                   " filters, have " + std::to_string(filters.size()) +
                   " (short by " + std::to_string(need - static_cast<int>(filters.size())) +
                   ")");
  }
  std::map<Split, SplitAudio> out;
  size_t next = 0;
  for (Split split : kAllSplits) {
    const auto& alloc = plan.For(split);
    SplitAudio sa;
    sa.provenance.type = NoiseType::kSsn;
    sa.provenance.split = split;
    sa.provenance.seed = seed;
    for (int i = 0; i < alloc.sources; ++i, ++next) {
      const std::string key = "ssn/" + std::string(SplitName(split)) + "/" + filter_ids[next];
      auto seg = SynthSsn(filters[next], alloc.seconds_each, DeriveSeed(seed, key), rate);
      sa.audio.insert(sa.audio.end(), seg.begin(), seg.end());
      sa.provenance.sources.push_back(filter_ids[next]);
    }
    sa.provenance.seconds = static_cast<double>(sa.audio.size()) / rate;
    out.emplace(split, std::move(sa));
  }
  return out;
}

std::vector<float> ConcatenateToDuration(std::span<const std::vector<float>> recordings,
                                         double seconds, int rate) {
  const int64_t need = std::llround(seconds * rate);
  std::vector<float> out;
  out.reserve(static_cast<size_t>(std::max<int64_t>(need, 0)));
  for (const auto& rec : recordings) {
    if (static_cast<int64_t>(out.size()) >= need) break;
    const int64_t take =
        std::min<int64_t>(need - static_cast<int64_t>(out.size()), rec.size());
    out.insert(out.end(), rec.begin(), rec.begin() + take);
  }
  if (static_cast<int64_t>(out.size()) < need) {
    throw VadError("noise split: need " + std::to_string(seconds) + " s, sources provide " +
                   std::to_string(static_cast<double>(out.size()) / rate) + " s");
  }
  return out;
}

std::map<Split, SplitAudio> AssembleBabbleSplits(std::span<const SpeakerAudio> speakers,
                                                 const BabbleSplitPlan& plan,
                                                 uint64_t seed, int rate) {
  const int need = plan.train_speakers + plan.val_speakers + plan.test_speakers;
  if (static_cast<int>(speakers.size()) < need) {
    throw VadError("babble splits: plan needs " + std::to_string(need) +
                   " speakers, have " + std::to_string(speakers.size()) +
                   " (short by " + std::to_string(need - static_cast<int>(speakers.size())) +
                   ")");
  }
  std::map<Split, SplitAudio> out;
  size_t next = 0;
  for (Split split : kAllSplits) {
    const int count = split == Split::kTrain ? plan.train_speakers
                      : split == Split::kVal ? plan.val_speakers
                                             : plan.test_speakers;
    std::vector<SpeakerAudio> group(speakers.begin() + next,
                                    speakers.begin() + next + count);
    next += static_cast<size_t>(count);
    const uint64_t split_seed =
        DeriveSeed(seed, "babble/" + std::string(SplitName(split)));
    auto babble = BuildBabble(group, BabbleConfig(), split_seed);
    std::vector<std::vector<float>> one{std::move(babble.audio)};
    SplitAudio sa;
    sa.audio = ConcatenateToDuration(one, plan.durations.For(split), rate);
    sa.provenance.type = NoiseType::kBabble;
    sa.provenance.split = split;
    sa.provenance.seed = split_seed;
    for (const auto& g : group) sa.provenance.sources.push_back(g.speaker_id);
    sa.provenance.seconds = static_cast<double>(sa.audio.size()) / rate;
    out.emplace(split, std::move(sa));
  }
  return out;
}

}  // namespace vadkit

// vadkit/labeling.cc

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

#include "vadkit/labeling.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vadkit {

namespace {

[[noreturn]] void AlignmentError(int line_number, const std::string& what) {
  if (line_number > 0) {
    throw VadError("alignment line " + std::to_string(line_number) + ": " + what);
  }
  throw VadError("alignment: " + what);
}

std::vector<std::string_view> SplitOn(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t pos = 0;
  for (;;) {
    const size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace

std::vector<Interval> AlignmentTrack::Words() const {
  std::vector<Interval> words;
  for (const auto& iv : intervals) {
    if (iv.kind == IntervalKind::kWord) words.push_back(iv);
  }
  return words;
}

AlignmentTrack MakeTrack(std::string utterance_id, double duration,
                         std::span<const std::pair<double, double>> words,
                         int line_number) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    AlignmentError(line_number, "duration must be positive");
  }
  std::vector<std::pair<double, double>> sorted(words.begin(), words.end());
  for (const auto& [start, end] : sorted) {
    if (!std::isfinite(start) || !std::isfinite(end)) {
      AlignmentError(line_number, "non-finite time");
    }
    if (start < 0.0 || end < 0.0) AlignmentError(line_number, "negative time");
    if (end < start) AlignmentError(line_number, "end before start");
    if (end == start) AlignmentError(line_number, "zero-length word");
    if (end > duration + kAlignmentGapTolerance) {
      AlignmentError(line_number, "word extends past utterance end");
    }
  }
  std::sort(sorted.begin(), sorted.end());

  AlignmentTrack track;
  track.utterance_id = std::move(utterance_id);
  track.duration = duration;
  double cursor = 0.0;
  for (auto [start, end] : sorted) {
    if (start < cursor - kAlignmentGapTolerance) {
      AlignmentError(line_number, "overlapping intervals");
    }
    if (start - cursor < kAlignmentGapTolerance) start = cursor;
    end = std::min(end, duration);
    if (duration - end < kAlignmentGapTolerance) end = duration;
    if (end <= start) continue;  // swallowed by snapping
    if (start > cursor) {
      track.intervals.push_back({cursor, start, IntervalKind::kPause});
    }
    track.intervals.push_back({start, end, IntervalKind::kWord});
    cursor = end;
  }
  if (cursor < duration) {
    track.intervals.push_back({cursor, duration, IntervalKind::kPause});
  }
  return track;
}

AlignmentTrack ParseAlignment(std::string_view json_line, int line_number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_line);
  } catch (const nlohmann::json::exception& ex) {
    AlignmentError(line_number, std::string("malformed JSON: ") + ex.what());
  }
  std::vector<std::pair<double, double>> words;
  std::string id;
  double duration = 0.0;
  try {
    id = j.at("id").get<std::string>();
    duration = j.at("duration").get<double>();
    for (const auto& w : j.at("words")) {
      if (!w.is_array() || w.size() != 2) {
        AlignmentError(line_number, "each word must be [start, end]");
      }
      words.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
  } catch (const nlohmann::json::exception& ex) {
    AlignmentError(line_number, ex.what());
  }
  if (id.empty()) AlignmentError(line_number, "empty id");
  return MakeTrack(std::move(id), duration, words, line_number);
}

std::string AlignmentToJson(const AlignmentTrack& track) {
  nlohmann::ordered_json j;
  j["id"] = track.utterance_id;
  auto words = nlohmann::ordered_json::array();
  for (const auto& w : track.Words()) words.push_back({w.start, w.end});
  j["words"] = std::move(words);
  j["duration"] = track.duration;
  return j.dump();
}

std::vector<AlignmentTrack> ReadAlignmentFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw VadError("cannot open alignment file " + path);
  std::vector<AlignmentTrack> tracks;
  std::string line;
  int line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    if (line.empty()) continue;
    tracks.push_back(ParseAlignment(line, line_number));
  }
  return tracks;
}

AlignmentTrack ConvertLibriSpeechAlignmentLine(std::string_view line,
                                               int line_number) {
  const size_t space = line.find(' ');
  if (space == std::string_view::npos) {
    AlignmentError(line_number, "expected '<id> \"words\" \"times\"'");
  }
  const std::string id(line.substr(0, space));
  auto quoted = [&](size_t from, size_t* after) {
    const size_t open = line.find('"', from);
    const size_t close =
        open == std::string_view::npos ? open : line.find('"', open + 1);
    if (close == std::string_view::npos) {
      AlignmentError(line_number, "missing quoted field");
    }
    *after = close + 1;
    return line.substr(open + 1, close - open - 1);
  };
  size_t pos = 0;
  const auto word_field = quoted(space, &pos);
  const auto time_field = quoted(pos, &pos);
  const auto tokens = SplitOn(word_field, ',');
  const auto times = SplitOn(time_field, ',');
  if (tokens.size() != times.size()) {
    AlignmentError(line_number, "word and time counts differ");
  }
  std::vector<std::pair<double, double>> words;
  double prev = 0.0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    double end = 0.0;
    try {
      end = std::stod(std::string(times[i]));
    } catch (const std::exception&) {
      AlignmentError(line_number, "bad time value");
    }
    if (end < prev) AlignmentError(line_number, "end before start");
    if (!tokens[i].empty() && end > prev) words.emplace_back(prev, end);
    prev = end;
  }
  return MakeTrack(id, prev, words, line_number);
}

FrameLabels LabelsFromTrack(const AlignmentTrack& track, const FrameParams& fp,
                            int64_t num_samples, int rate) {
  fp.Validate();
  if (num_samples < 0) num_samples = std::llround(track.duration * rate);
  FrameLabels out;
  out.frame_params = fp;
  const int64_t n = NumFrames(num_samples, fp, rate);
  out.labels.assign(static_cast<size_t>(n), 0);
  const auto words = track.Words();
  size_t w = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(FrameCenterSample(i, fp, rate)) / rate;
    while (w < words.size() && words[w].end <= t) ++w;
    if (w < words.size() && words[w].start <= t) out.labels[i] = 1;
  }
  return out;
}

SsrStats ComputeSsrStats(const FrameLabels& labels) {
  if (labels.labels.empty()) throw VadError("ssr: empty labels");
  SsrStats s;
  const double hop = labels.frame_params.hop;
  const size_t speech = labels.NumSpeech();
  s.speech_seconds = hop * static_cast<double>(speech);
  s.silence_seconds = hop * static_cast<double>(labels.size() - speech);
  s.total_seconds = hop * static_cast<double>(labels.size());
  s.ssr = s.silence_seconds / s.total_seconds;
  return s;
}

std::vector<SampleSpan> SilenceSpans(const FrameLabels& labels,
                                     int64_t num_samples, int rate) {
  std::vector<SampleSpan> spans;
  const auto& fp = labels.frame_params;
  const size_t n = labels.size();
  size_t i = 0;
  while (i < n) {
    if (labels.IsSpeech(i)) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < n && !labels.IsSpeech(j + 1)) ++j;
    SampleSpan span{FrameCenterSample(static_cast<int64_t>(i), fp, rate),
                    FrameCenterSample(static_cast<int64_t>(j), fp, rate) + 1};
    span.end = std::min(span.end, num_samples);
    if (span.end > span.begin) spans.push_back(span);
    i = j + 1;
  }
  return spans;
}

std::vector<std::vector<float>> ExtractSilence(const Utterance& utt,
                                               const FrameLabels& labels) {
  const int64_t len = static_cast<int64_t>(utt.samples.size());
  if (static_cast<int64_t>(labels.size()) !=
      NumFrames(len, labels.frame_params, utt.sample_rate)) {
    throw VadError("extract_silence: labels not aligned with " + utt.id);
  }
  std::vector<std::vector<float>> slices;
  for (const auto& span : SilenceSpans(labels, len, utt.sample_rate)) {
    slices.emplace_back(utt.samples.begin() + span.begin,
                        utt.samples.begin() + span.end);
  }
  return slices;
}

SilencePool::SilencePool(std::span<const std::vector<float>> segments) {
  auto audio = std::make_shared<std::vector<float>>();
  for (const auto& seg : segments) audio->insert(audio->end(), seg.begin(), seg.end());
  audio_ = std::move(audio);
}

SilencePool SilencePool::WithCursor(int64_t cursor) const {
  SilencePool pool;
  pool.audio_ = audio_;
  const int64_t n = size();
  pool.cursor_ = n > 0 ? ((cursor % n) + n) % n : 0;
  return pool;
}

std::vector<float> SilencePool::Take(int64_t n) {
  if (empty()) throw VadError("silence pool is empty");
  if (n < 0) throw VadError("silence pool: negative take");
  std::vector<float> out;
  out.reserve(static_cast<size_t>(n));
  const auto& audio = *audio_;
  const int64_t total = size();
  while (static_cast<int64_t>(out.size()) < n) {
    const int64_t chunk =
        std::min<int64_t>(n - static_cast<int64_t>(out.size()), total - cursor_);
    out.insert(out.end(), audio.begin() + cursor_, audio.begin() + cursor_ + chunk);
    cursor_ = (cursor_ + chunk) % total;
  }
  return out;
}

}  // namespace vadkit

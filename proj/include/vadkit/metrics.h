// vadkit/metrics.h

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

// Frame-level detection metrics. Speech is the positive class; a miss is a
// speech frame scored below threshold.

#ifndef VADKIT_METRICS_H_
#define VADKIT_METRICS_H_

#include <cstdint>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct DcfParams {
  double c_miss = 10.0;
  double c_fa = 1.0;
  double p_target = 0.01;
  void Validate() const;
};

struct ScoreSet {
  std::vector<double> scores;
  std::vector<uint8_t> labels;  // 1 = speech

  size_t size() const { return scores.size(); }
  int64_t NumPositive() const;
  void Append(const ScoreSet& other);
  /// Throws on length mismatch or non-finite scores.
  void Validate() const;
};

/// score >= threshold is predicted speech.
ConfusionCounts ConfusionAt(const ScoreSet& set, double threshold);

struct OperatingPoint {
  double threshold = 0.0;  // +inf for the reject-everything sentinel
  int64_t tp = 0;
  int64_t fp = 0;
  double p_miss = 1.0;
  double p_fa = 0.0;
};

/// The reject-everything point followed by one point per distinct score in
/// descending order. The last point accepts everything.
std::vector<OperatingPoint> OperatingPoints(const ScoreSet& set);

double RocAuc(const ScoreSet& set);
double Eer(const ScoreSet& set);
double MinDcf(const ScoreSet& set, const DcfParams& params = DcfParams(),
              bool normalize = false);

struct DetPoint {
  double p_fa = 0.0;
  double p_miss = 1.0;
};
std::vector<DetPoint> DetPoints(const ScoreSet& set);
std::string DetCsv(std::span<const DetPoint> points);

struct Condition {
  NoiseType noise = NoiseType::kNature;
  int snr_db = 0;
  ScoreSet set;
};

struct Report {
  // auc[noise][snr index]; empty when the condition is absent.
  std::array<std::array<std::optional<double>, 6>, 9> auc;
  std::array<std::optional<double>, 9> noise_avg;  // over SNRs
  std::array<std::optional<double>, 6> snr_avg;    // over noise types
  std::optional<double> overall;                    // over all conditions
  // Pooled over every frame of every condition.
  double pooled_auc = 0.0;
  double pooled_eer = 0.0;
  double pooled_min_dcf = 0.0;
  std::vector<DetPoint> pooled_det;
  int64_t pooled_frames = 0;
  std::vector<std::string> warnings;
};

Report Aggregate(std::span<const Condition> conditions, const DcfParams& params = DcfParams(),
                 bool normalize_dcf = false);

/// SNR rows then an Avg row; one column per noise type then Average.
std::string ReportCsv(const Report& report);
/// pooled_auc, pooled_eer, pooled_min_dcf, overall_auc as key,value lines.
std::string ReportSummaryCsv(const Report& report);

/// Joins per-utterance scores and labels by id. Lengths must match per id.
ScoreSet JoinScores(std::span<const std::pair<std::string, std::vector<double>>> scores,
                    std::span<const LabeledId> labels);

}  // namespace vadkit

#endif  // VADKIT_METRICS_H_

// vadkit/metrics.cc

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

#include "vadkit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

namespace vadkit {

namespace {

void RequireBothClasses(const ScoreSet& set, const char* what) {
  set.Validate();
  const int64_t pos = set.NumPositive();
  if (pos == 0 || pos == static_cast<int64_t>(set.size())) {
    throw VadError(std::string(what) + ": both classes must be present");
  }
}

std::string Cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string();
}

std::optional<double> Mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void DcfParams::Validate() const {
  if (!(c_miss > 0.0) || !(c_fa > 0.0)) throw VadError("dcf: costs must be positive");
  if (!(p_target > 0.0 && p_target < 1.0)) throw VadError("dcf: p_target must be in (0, 1)");
}

int64_t ScoreSet::NumPositive() const {
  return std::count_if(labels.begin(), labels.end(), [](uint8_t l) { return l != 0; });
}

void ScoreSet::Append(const ScoreSet& other) {
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

void ScoreSet::Validate() const {
  if (scores.size() != labels.size()) {
    throw VadError(fmt::format("score set: {} scores but {} labels", scores.size(),
                               labels.size()));
  }
  for (double s : scores) {
    if (std::isnan(s)) throw VadError("score set: NaN score");
  }
}

ConfusionCounts ConfusionAt(const ScoreSet& set, double threshold) {
  set.Validate();
  ConfusionCounts c;
  for (size_t i = 0; i < set.size(); ++i) {
    const bool pred = set.scores[i] >= threshold;
    if (set.labels[i]) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

std::vector<OperatingPoint> OperatingPoints(const ScoreSet& set) {
  set.Validate();
  const int64_t n = static_cast<int64_t>(set.size());
  const int64_t pos = set.NumPositive();
  const int64_t neg = n - pos;
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int64_t a, int64_t b) { return set.scores[a] > set.scores[b]; });

  auto make = [&](double thr, int64_t tp, int64_t fp) {
    OperatingPoint p;
    p.threshold = thr;
    p.tp = tp;
    p.fp = fp;
    p.p_miss = pos > 0 ? static_cast<double>(pos - tp) / static_cast<double>(pos) : 0.0;
    p.p_fa = neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
    return p;
  };
  std::vector<OperatingPoint> points;
  points.push_back(make(std::numeric_limits<double>::infinity(), 0, 0));
  int64_t tp = 0, fp = 0;
  for (int64_t i = 0; i < n;) {
    const double s = set.scores[order[i]];
    while (i < n && set.scores[order[i]] == s) {
      set.labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    points.push_back(make(s, tp, fp));
  }
  return points;
}

double RocAuc(const ScoreSet& set) {
  RequireBothClasses(set, "roc_auc");
  const auto pts = OperatingPoints(set);
  const int64_t pos = pts.back().tp;
  const int64_t neg = pts.back().fp;
  // Twice the area in count units; exact in integers.
  __int128 area2 = 0;
  for (size_t i = 1; i < pts.size(); ++i) {
    area2 += static_cast<__int128>(pts[i].fp - pts[i - 1].fp) * (pts[i].tp + pts[i - 1].tp);
  }
  return static_cast<double>(static_cast<long double>(area2) /
                             (2.0L * static_cast<long double>(pos) * neg));
}

double Eer(const ScoreSet& set) {
  RequireBothClasses(set, "eer");
  const auto pts = OperatingPoints(set);
  for (size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i].p_miss - pts[i].p_fa;
    if (d > 0.0) continue;
    if (d == 0.0) return pts[i].p_miss;
    const double d0 = pts[i - 1].p_miss - pts[i - 1].p_fa;
    const double alpha = d0 / (d0 - d);
    return pts[i - 1].p_miss + alpha * (pts[i].p_miss - pts[i - 1].p_miss);
  }
  // Unreachable: the accept-everything point has p_miss 0, p_fa 1.
  return pts.back().p_miss;
}

double MinDcf(const ScoreSet& set, const DcfParams& params, bool normalize) {
  params.Validate();
  RequireBothClasses(set, "min_dcf");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : OperatingPoints(set)) {
    const double dcf = params.c_miss * p.p_miss * params.p_target +
                       params.c_fa * p.p_fa * (1.0 - params.p_target);
    best = std::min(best, dcf);
  }
  if (normalize) {
    best /= std::min(params.c_miss * params.p_target, params.c_fa * (1.0 - params.p_target));
  }
  return best;
}

std::vector<DetPoint> DetPoints(const ScoreSet& set) {
  RequireBothClasses(set, "det_points");
  std::vector<DetPoint> out;
  for (const auto& p : OperatingPoints(set)) out.push_back({p.p_fa, p.p_miss});
  return out;
}

std::string DetCsv(std::span<const DetPoint> points) {
  std::string out = "p_fa,p_miss\n";
  for (const auto& p : points) fmt::format_to(std::back_inserter(out), "{:.9g},{:.9g}\n", p.p_fa, p.p_miss);
  return out;
}

Report Aggregate(std::span<const Condition> conditions, const DcfParams& params,
                 bool normalize_dcf) {
  Report r;
  std::array<std::array<ScoreSet, 6>, 9> cells;
  std::array<std::array<bool, 6>, 9> present{};
  ScoreSet pooled;
  for (const auto& c : conditions) {
    const auto it = std::find(kSnrLevels.begin(), kSnrLevels.end(), c.snr_db);
    if (it == kSnrLevels.end()) throw VadError(fmt::format("aggregate: bad SNR {}", c.snr_db));
    const size_t n = static_cast<size_t>(c.noise);
    const size_t s = static_cast<size_t>(it - kSnrLevels.begin());
    c.set.Validate();
    cells[n][s].Append(c.set);
    present[n][s] = true;
  }
  std::vector<std::pair<size_t, size_t>> todo;
  for (size_t n = 0; n < 9; ++n) {
    for (size_t s = 0; s < 6; ++s) {
      if (present[n][s]) todo.emplace_back(n, s);
    }
  }
  std::vector<std::optional<double>> auc(todo.size());
  std::vector<std::string> errs(todo.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(todo.size()); ++i) {
    const auto& set = cells[todo[i].first][todo[i].second];
    const int64_t pos = set.NumPositive();
    if (set.size() == 0 || pos == 0 || pos == static_cast<int64_t>(set.size())) {
      errs[i] = fmt::format("condition {}/{} dB omitted: needs both classes",
                            NoiseTypeName(static_cast<NoiseType>(todo[i].first)),
                            kSnrLevels[todo[i].second]);
      continue;
    }
    auc[i] = RocAuc(set);
  }
  std::vector<double> all;
  std::array<std::vector<double>, 9> by_noise;
  std::array<std::vector<double>, 6> by_snr;
  for (size_t i = 0; i < todo.size(); ++i) {
    const auto [n, s] = todo[i];
    if (!auc[i]) {
      r.warnings.push_back(errs[i]);
      continue;
    }
    r.auc[n][s] = auc[i];
    all.push_back(*auc[i]);
    by_noise[n].push_back(*auc[i]);
    by_snr[s].push_back(*auc[i]);
    pooled.Append(cells[n][s]);
  }
  for (size_t n = 0; n < 9; ++n) r.noise_avg[n] = Mean(by_noise[n]);
  for (size_t s = 0; s < 6; ++s) r.snr_avg[s] = Mean(by_snr[s]);
  r.overall = Mean(all);
  r.pooled_frames = static_cast<int64_t>(pooled.size());
  if (!all.empty()) {
    r.pooled_auc = RocAuc(pooled);
    r.pooled_eer = Eer(pooled);
    r.pooled_min_dcf = MinDcf(pooled, params, normalize_dcf);
    r.pooled_det = DetPoints(pooled);
  } else {
    r.warnings.push_back("no usable conditions; pooled metrics not computed");
  }
  return r;
}

std::string ReportCsv(const Report& r) {
  std::string out = "SNR";
  for (NoiseType t : kAllNoiseTypes) fmt::format_to(std::back_inserter(out), ",{}", NoiseTypeName(t));
  out += ",Average\n";
  for (size_t s = 0; s < 6; ++s) {
    out += std::to_string(kSnrLevels[s]);
    for (size_t n = 0; n < 9; ++n) out += "," + Cell(r.auc[n][s]);
    out += "," + Cell(r.snr_avg[s]) + "\n";
  }
  out += "Avg";
  for (size_t n = 0; n < 9; ++n) out += "," + Cell(r.noise_avg[n]);
  out += "," + Cell(r.overall) + "\n";
  return out;
}

std::string ReportSummaryCsv(const Report& r) {
  return fmt::format(
      "metric,value\npooled_auc,{:.6f}\npooled_eer,{:.6f}\npooled_min_dcf,{:.6f}\n"
      "overall_auc,{}\npooled_frames,{}\n",
      r.pooled_auc, r.pooled_eer, r.pooled_min_dcf,
      r.overall ? fmt::format("{:.6f}", *r.overall) : std::string(), r.pooled_frames);
}

ScoreSet JoinScores(std::span<const std::pair<std::string, std::vector<double>>> scores,
                    std::span<const LabeledId> labels) {
  std::unordered_map<std::string, const FrameLabels*> by_id;
  for (const auto& l : labels) by_id[l.id] = &l.labels;
  ScoreSet out;
  for (const auto& [id, post] : scores) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw VadError("join: no labels for " + id);
    if (it->second->size() != post.size()) {
      throw VadError(fmt::format("join: {} has {} scores but {} labels", id, post.size(),
                                 it->second->size()));
    }
    out.scores.insert(out.scores.end(), post.begin(), post.end());
    out.labels.insert(out.labels.end(), it->second->labels.begin(), it->second->labels.end());
  }
  return out;
}

}  // namespace vadkit

// vadkit/bench_kernels.cc

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

// OpenMP kernels against their serial references.
//   vadkit-bench [--benchmark_filter=...]
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "vadkit/bdnn.h"
#include "vadkit/features.h"
#include "vadkit/noisegen.h"

namespace {

std::vector<float> Noise(size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<float> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

void Features(benchmark::State& state, bool parallel) {
  const auto x = Noise(16000 * 10);
  const vadkit::FeatureExtractor ex(vadkit::FeatureOptions::Mfcc());
  for (auto _ : state) {
    auto f = parallel ? ex.Static(x) : ex.StaticSerial(x);
    benchmark::DoNotOptimize(f.values.data());
  }
  state.SetItemsProcessed(state.iterations() * 998);
}
BENCHMARK_CAPTURE(Features, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(Features, serial, false)->Unit(benchmark::kMillisecond);

void Autocorrelation(benchmark::State& state, bool parallel) {
  const auto x = Noise(16000 * 30);
  for (auto _ : state) {
    auto r = parallel ? vadkit::AveragedAutocorrelation(x, 12)
                      : vadkit::AveragedAutocorrelationSerial(x, 12);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK_CAPTURE(Autocorrelation, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(Autocorrelation, serial, false)->Unit(benchmark::kMillisecond);

void WindowAverage(benchmark::State& state, bool parallel) {
  const vadkit::ContextSpec cs;
  const Eigen::MatrixXd out = Eigen::MatrixXd::Random(cs.WindowSize(), 100000);
  for (auto _ : state) {
    auto p = parallel ? vadkit::AverageWindowPredictions(out, cs)
                      : vadkit::AverageWindowPredictionsSerial(out, cs);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK_CAPTURE(WindowAverage, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(WindowAverage, serial, false)->Unit(benchmark::kMillisecond);

// Batch gathering feeds every training step; no serial twin, reported alone.
void GatherBatch(benchmark::State& state) {
  const vadkit::ContextSpec cs;
  vadkit::TrainingUtterance u;
  u.id = "u";
  u.features = vadkit::RowMatrixF::Random(2000, 39);
  u.labels.labels.assign(2000, 1);
  std::vector<std::pair<uint32_t, uint32_t>> idx;
  for (uint32_t t = 0; t < 512; ++t) idx.emplace_back(0u, (t * 37u) % 2000u);
  Eigen::MatrixXf x, y;
  for (auto _ : state) {
    vadkit::GatherBatch(std::span(&u, 1), idx, cs, &x, &y);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(GatherBatch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

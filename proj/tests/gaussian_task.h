// vadkit/gaussian_task.h

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

#ifndef VADKIT_TESTS_GAUSSIAN_TASK_H_
#define VADKIT_TESTS_GAUSSIAN_TASK_H_

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vadkit/bdnn.h"

namespace vadkit::testing {

/// Frame stream with class runs of 10-60 frames; every dimension is N(0,1)
/// for nonspeech and N(shift,1) for speech.
inline std::vector<TrainingUtterance> GaussianFrames(int utterances, int frames, int dims,
                                                     double shift, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> run(10, 60);
  std::vector<TrainingUtterance> out;
  for (int u = 0; u < utterances; ++u) {
    TrainingUtterance t;
    t.id = "g" + std::to_string(u);
    t.features.resize(frames, dims);
    t.labels.labels.resize(static_cast<size_t>(frames));
    int cls = u % 2, left = run(rng);
    for (int f = 0; f < frames; ++f) {
      if (--left <= 0) {
        cls ^= 1;
        left = run(rng);
      }
      t.labels.labels[static_cast<size_t>(f)] = static_cast<uint8_t>(cls);
      for (int d = 0; d < dims; ++d) {
        t.features(f, d) = static_cast<float>(g(rng) + (cls ? shift : 0.0));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace vadkit::testing

#endif  // VADKIT_TESTS_GAUSSIAN_TASK_H_

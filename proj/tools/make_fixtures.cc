// vadkit/make_fixtures.cc

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

// Regenerates the synthetic fixture corpus.
//   vadkit-make-fixtures --out fixtures [--noise-sources] [--seed 2026]

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "fixture_synth.h"
#include "vadkit/labeling.h"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic fixture generator"};
  std::string out = "fixtures";
  uint64_t seed = 2026;
  bool clean = true, sources = false;
  double recording_seconds = 20.0;
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Master seed");
  app.add_flag("--noise-sources", sources, "Also write noise-source speakers and recordings");
  app.add_flag("--no-clean", [&](int64_t) { clean = false; }, "Skip the clean corpus");
  app.add_option("--recording-seconds", recording_seconds, "Length of each recorded-noise file");
  CLI11_PARSE(app, argc, argv);
  try {
    vadkit::fixture::FixtureLayout layout;
    layout.recording_seconds = recording_seconds;
    if (clean) {
      vadkit::fixture::WriteCleanCorpus(out, layout, seed);
      std::string libri;
      for (const auto& t : vadkit::ReadAlignmentFile(out + "/alignments.jsonl")) {
        libri += vadkit::fixture::LibriSpeechAlignmentLine(t) + "\n";
      }
      vadkit::WriteFileAtomic(out + "/alignments_librispeech.txt", libri);
    }
    if (sources) vadkit::fixture::WriteNoiseSources(out, layout, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::printf("{\"status\":\"ok\",\"out\":\"%s\"}\n", out.c_str());
  return 0;
}

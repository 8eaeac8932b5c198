// vadkit/vadkit.cc

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

// Command-line front end: one subcommand per pipeline stage.
//
//   vadkit <command> [--config run.cfg] [--key value ...]
//
// Every pipeline parameter lives in the run configuration; flags override
// the file. VADKIT_LOG_LEVEL and VADKIT_WORKERS are the only environment
// variables read. On success a single JSON summary line goes to stdout.

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "commands.h"

namespace {

std::string FlagName(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

void PrintSummary(const nlohmann::ordered_json& j) {
  std::printf("%s\n", j.dump().c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  using vadkit::KeyKind;
  CLI::App app{"vadkit: noisy VAD corpus synthesis and evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  struct Bound {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::string mode;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, std::unique_ptr<Bound>> bound;

  for (const auto& cmd : vadkit::Commands()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(cmd.name, cmd.help);
    b->sub->add_option("--config", b->config_path, "Run configuration (key = value)");
    if (cmd.name == "gen-noise") {
      b->sub->add_option("mode", b->mode, "ssn | babble | assemble")
          ->required()
          ->check(CLI::IsMember({"ssn", "babble", "assemble"}));
    }
    for (const auto& key : cmd.keys) {
      const auto* spec = vadkit::FindKey(key);
      std::string help = spec->help;
      if (!spec->default_value.empty()) help += " [" + spec->default_value + "]";
      if (spec->kind == KeyKind::kBool) {
        b->sub->add_flag(FlagName(key) + "{true}", b->values[key], help);
      } else {
        b->sub->add_option(FlagName(key), b->values[key], help);
      }
    }
    bound.emplace(cmd.name, std::move(b));
  }
  CLI11_PARSE(app, argc, argv);

  for (auto& [name, b] : bound) {
    if (!b->sub->parsed()) continue;
    const auto* cmd = vadkit::FindCommand(name);
    vadkit::Logger log(name, vadkit::Logger::LevelFromEnv());

    std::vector<std::string> errors;
    vadkit::RunConfig cfg;
    if (!b->config_path.empty()) cfg = vadkit::RunConfig::ParseFile(b->config_path, &errors);
    for (const auto& key : cmd->keys) {
      if (b->sub->count(FlagName(key)) > 0) cfg.Set(key, b->values[key]);
    }
    auto required = cmd->required;
    if (name == "gen-noise") {
      required.push_back(b->mode == "assemble" ? "recordings_dir" : "speakers_dir");
    }
    for (auto& e : cfg.Validate(cmd->keys, required)) errors.push_back(std::move(e));
    if (!errors.empty()) {
      for (const auto& e : errors) log.Error("config_invalid", {{"violation", e}});
      PrintSummary({{"status", "error"}, {"command", name}, {"violations", errors}});
      return 2;
    }
    try {
      auto res = vadkit::RunCommand(name, b->mode, cfg, log);
      PrintSummary(res.summary);
      return res.exit_code;
    } catch (const std::exception& e) {
      log.Error("failed", {{"error", e.what()}});
      PrintSummary({{"status", "error"}, {"command", name}, {"error", e.what()}});
      return 1;
    }
  }
  return 2;
}

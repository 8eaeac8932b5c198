// vadkit/commands.h

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

// Pipeline subcommands. Each reads a RunConfig, writes into out_dir, and
// fills a one-line JSON summary.

#ifndef VADKIT_COMMANDS_H_
#define VADKIT_COMMANDS_H_

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.h"

namespace vadkit {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

/// Structured JSONL log lines on a stream (stderr by default).
class Logger {
 public:
  explicit Logger(std::string command, LogLevel level = LogLevel::kInfo,
                  std::FILE* out = stderr);
  /// Reads VADKIT_LOG_LEVEL (debug|info|warn|error).
  static LogLevel LevelFromEnv();
  void Log(LogLevel level, const std::string& event,
           nlohmann::ordered_json fields = nlohmann::ordered_json::object());
  void Info(const std::string& event, nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
    Log(LogLevel::kInfo, event, std::move(fields));
  }
  void Warn(const std::string& event, nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
    Log(LogLevel::kWarn, event, std::move(fields));
  }
  void Error(const std::string& event, nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
    Log(LogLevel::kError, event, std::move(fields));
  }

 private:
  std::string command_;
  LogLevel level_;
  std::FILE* out_;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<std::string> keys;      // keys the command reads
  std::vector<std::string> required;  // keys that must be set
};

const std::vector<CommandSpec>& Commands();
const CommandSpec* FindCommand(const std::string& name);

struct CommandResult {
  int exit_code = 0;  // 0 iff every requested artifact was produced
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

/// Reads VADKIT_WORKERS; 0 when unset.
int WorkersFromEnv();

/// Runs a validated command. `mode` is the gen-noise kind (ssn|babble|
/// assemble) and empty otherwise. Throws VadError on fatal problems.
CommandResult RunCommand(const std::string& name, const std::string& mode,
                         const RunConfig& config, Logger& log);

}  // namespace vadkit

#endif  // VADKIT_COMMANDS_H_

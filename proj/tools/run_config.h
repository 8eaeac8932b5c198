// vadkit/run_config.h

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

// Declarative run configuration: a UTF-8 `key = value` file whose entries
// command-line flags may override. Every key has a type; validation reports
// every violation at once.

#ifndef VADKIT_RUN_CONFIG_H_
#define VADKIT_RUN_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

enum class KeyKind {
  kInputPath,   // must exist when required
  kOutputPath,  // created on demand
  kString,
  kInt,
  kUint64,
  kDouble,
  kBool,
  kIntList,
  kSnrList,  // integers from the six mixing levels
  kDoubleList,
  kNoiseList,
  kChoice,
};

struct KeySpec {
  KeySpec(std::string n, KeyKind k, std::string def, std::string h,
          std::vector<std::string> c = {})
      : name(std::move(n)), kind(k), default_value(std::move(def)), help(std::move(h)),
        choices(std::move(c)) {}

  std::string name;
  KeyKind kind = KeyKind::kString;
  std::string default_value;  // empty = unset
  std::string help;
  std::vector<std::string> choices;  // kChoice only
};

/// All keys any subcommand understands.
const std::vector<KeySpec>& ConfigKeys();
const KeySpec* FindKey(std::string_view name);

class RunConfig {
 public:
  /// Parses `key = value` lines; `#` starts a comment. Problems are appended
  /// to `errors` rather than thrown.
  static RunConfig ParseText(std::string_view text, std::vector<std::string>* errors);
  static RunConfig ParseFile(const std::string& path, std::vector<std::string>* errors);

  void Set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Explicit value or the key's default; nullopt when neither exists.
  std::optional<std::string> Raw(const std::string& key) const;
  bool Has(const std::string& key) const { return Raw(key).has_value(); }

  std::string Str(const std::string& key) const;
  int Int(const std::string& key) const;
  uint64_t Uint64(const std::string& key) const;
  double Double(const std::string& key) const;
  bool Bool(const std::string& key) const;
  std::vector<int> IntList(const std::string& key) const;
  std::vector<double> DoubleList(const std::string& key) const;
  std::vector<NoiseType> NoiseList(const std::string& key) const;

  /// Checks the typed value of every key in `used`, that each key in
  /// `required` has a value, and that required input paths exist. Returns
  /// one message per violation.
  std::vector<std::string> Validate(const std::vector<std::string>& used,
                                    const std::vector<std::string>& required) const;

  /// Effective `key = value` lines for `keys`, in the order given.
  std::string Dump(const std::vector<std::string>& keys) const;

  const std::map<std::string, std::string>& explicit_values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Checks one value against its key's type; returns an error or "".
std::string CheckValue(const KeySpec& spec, const std::string& value);

}  // namespace vadkit

#endif  // VADKIT_RUN_CONFIG_H_

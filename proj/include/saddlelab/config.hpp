// Copyright 2026 The saddlelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "saddlelab/assumptions.hpp"
#include "saddlelab/experiment.hpp"

namespace saddlelab {

enum class ValueType { Int, UInt, Float, String, FloatList };

using ConfigValue =
    std::variant<std::int64_t, std::uint64_t, double, std::string, std::vector<double>>;

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::optional<ConfigValue> default_value;  // empty for mandatory keys
};

/// Every accepted key with its type and default.
const std::vector<KeySpec>& config_keys();

/// A complete, validated run configuration (all keys present).
struct RunConfigDocument {
  std::map<std::string, ConfigValue> values;

  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t seed() const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& list(const std::string& key) const;

  friend bool operator==(const RunConfigDocument&, const RunConfigDocument&) = default;
};

using ConfigEntries = std::map<std::string, ConfigValue>;

/// Parses `key = value` lines (`#` starts a comment) with key and type
/// checks, but without defaults or semantic validation. Values are
/// integers, floats, bare or double-quoted strings, or `[f, f, ...]` lists.
ConfigEntries parse_entries(std::string_view text);

/// Parses one literal for `key`; line is used in error messages (0 = flag).
ConfigValue parse_value(std::string_view key, std::string_view literal, int line = 0);

/// Fills defaults, checks mandatory keys, and validates every module's
/// construction rules. Errors name the offending key.
RunConfigDocument finalize(ConfigEntries entries);

RunConfigDocument parse_config(std::string_view text);

std::string serialize_config(const RunConfigDocument& doc);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

std::string format_value(const ConfigValue& value);

Objective<double> make_objective(const RunConfigDocument& doc);
NoiseOracle<double> make_oracle(const RunConfigDocument& doc);
MethodConfig<double> make_method(const RunConfigDocument& doc);
TrialConfig make_trial_config(const RunConfigDocument& doc);
CheckSettings make_check_settings(const RunConfigDocument& doc);

}  // namespace saddlelab

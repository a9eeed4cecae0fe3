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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "saddlelab/assumptions.hpp"
#include "saddlelab/config.hpp"
#include "saddlelab/experiment.hpp"

namespace saddlelab {

/// Field holding the wall-clock time; the only nondeterministic output.
inline constexpr const char* kTimestampField = "generated_at";

/// Stride-recorded rows: n, x_1..x_d, f, grad_norm, v_norm, dist_<label>..., M_norm.
std::string trial_csv(const TrialResult& result, const Objective<double>& objective);

/// One row per trial with its terminal classification.
std::string summary_csv(const std::vector<TrialResult>& results,
                        const Objective<double>& objective);

/// bin_center, max_v_norm, fitted.
std::string rate_csv(const RateFit& fit);

nlohmann::json config_json(const RunConfigDocument& doc);
nlohmann::json escape_report_json(const EscapeReport& report, const RunConfigDocument& doc,
                                  const Objective<double>& objective, bool passed);
nlohmann::json assumption_report_json(const AssumptionReport& report,
                                      const CheckSettings& settings,
                                      const NoiseOracle<double>& oracle);

/// UTC time in ISO 8601.
std::string utc_timestamp();

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Subcommands. Each returns the process exit code: 0 iff every check the
/// command performs passes its declared threshold.
int command_run(const RunConfigDocument& doc, std::ostream& log);
int command_check(const RunConfigDocument& doc, std::ostream& log);
int command_rate(const RunConfigDocument& doc, std::ostream& log);
int command_sweep(const RunConfigDocument& doc, const std::string& key,
                  const std::vector<std::string>& values, std::ostream& log);

}  // namespace saddlelab

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

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saddlelab/landscape.hpp"
#include "saddlelab/optim.hpp"
#include "saddlelab/oracle.hpp"

namespace saddlelab {

/// Initial point: fixed (radius 0) or uniform in the ball around center.
struct InitialSampler {
  Eigen::VectorXd center;
  double radius = 0;
};

struct TrialConfig {
  NoiseOracle<double> oracle;
  MethodConfig<double> method;
  InitialSampler init;
  std::int64_t horizon = 200000;
  std::int64_t record_stride = 1000;
  std::uint64_t master_seed = 0;
  double saddle_tolerance = 0.1;
  double minimum_tolerance = 0.1;

  const Objective<double>& objective() const { return oracle.base(); }
  void validate() const;
};

enum class TerminalClass { SaddleComponent, MinimumComponent, Diverged, Unresolved };

const char* to_string(TerminalClass c);

/// One recorded step. n counts updates applied (0 is the initial point).
struct TrialRow {
  std::int64_t n = 0;
  Eigen::VectorXd x;
  double f = 0;
  double grad_norm = 0;
  double v_norm = 0;
  std::vector<double> distances;  // one per annotated component
  double martingale_norm = 0;
};

struct TrialResult {
  std::int64_t trial_index = 0;
  Eigen::VectorXd final_point;
  double final_grad_norm = 0;
  std::vector<TrialRow> rows;
  /// M_n = sum_{i <= n} alpha_i (grad f(x_i) - g_i) at the last completed step.
  Eigen::VectorXd martingale;
  TerminalClass classification = TerminalClass::Unresolved;
  int component = -1;  // index into critical_components(), -1 when none
  std::optional<std::int64_t> diverged_at;

  /// Number of updates actually applied.
  std::int64_t steps() const { return rows.empty() ? 0 : rows.back().n; }
};

/// Runs one trial on the stream (master_seed, trial_index). Rows are taken
/// at n = 0, at every multiple of record_stride, and at the terminal step.
TrialResult run_trial(const TrialConfig& config, std::int64_t trial_index);

/// Terminal classification: nearest saddle within saddle_tolerance wins;
/// otherwise the nearest minimum within minimum_tolerance provided every
/// saddle is farther than saddle_tolerance; otherwise unresolved.
std::pair<TerminalClass, int> classify_terminal(const Objective<double>& objective,
                                                const Eigen::VectorXd& x,
                                                double saddle_tolerance,
                                                double minimum_tolerance);

struct ProportionInterval {
  double estimate = 0;
  double lower = 0;
  double upper = 0;
};

/// Wilson score interval at the given z (1.959963984540054 for 95%).
ProportionInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                                   double z = 1.959963984540054);

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double band = 0;  // standard error of the slope
  std::vector<double> bin_centers;  // geometric bin centers (step index)
  std::vector<double> bin_max;      // max ||v|| per non-empty bin
};

/// Log-log fit of the binned maximum of ||v_n|| over the last tail_fraction
/// of the horizon (20 logarithmic bins).
RateFit fit_velocity_rate(const TrialResult& result, double tail_fraction);

/// Same fit with each bin's maximum taken across all trials (envelope).
RateFit fit_velocity_envelope(const std::vector<TrialResult>& results, double tail_fraction);

struct MartingaleCheck {
  double mean_square_norm = 0;   // mean over trials of ||M_N||^2
  double expected = 0;           // s^2 * sum_{i <= N} alpha_i^2
  std::optional<double> ratio;   // empty when expected == 0 (exact oracle)
  int trials = 0;
  bool pass = false;             // ratio in [0.7, 1.3], or zero numerator without noise
};

MartingaleCheck check_martingale(const std::vector<TrialResult>& results,
                                 const NoiseOracle<double>& oracle,
                                 const StepSchedule<double>& schedule);

struct GradientSummary {
  double median = 0;
  double lower_quartile = 0;
  double upper_quartile = 0;
};

GradientSummary gradient_convergence_summary(const std::vector<TrialResult>& results);

struct EscapeReport {
  std::int64_t trials = 0;
  std::int64_t saddle_count = 0;
  std::int64_t minimum_count = 0;
  std::int64_t diverged_count = 0;
  std::int64_t unresolved_count = 0;
  std::map<std::string, std::int64_t> component_counts;  // by component label
  ProportionInterval saddle_fraction;
  GradientSummary final_gradient;
  std::optional<RateFit> velocity_fit;  // pooled envelope; empty if too few rows
  std::optional<MartingaleCheck> martingale;
  double tail_fraction = 0.9;
};

EscapeReport summarize(const TrialConfig& config, const std::vector<TrialResult>& results,
                       double tail_fraction = 0.9);

struct MonteCarloRun {
  std::vector<TrialResult> trials;
  EscapeReport report;
};

/// Trials 0..count-1 on independent streams. Output is identical for any
/// parallelism since each trial owns its stream and result slot.
std::vector<TrialResult> run_trials(const TrialConfig& config, std::int64_t count,
                                    int parallelism);

MonteCarloRun run_monte_carlo(const TrialConfig& config, std::int64_t count, int parallelism,
                              double tail_fraction = 0.9);

}  // namespace saddlelab

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
#include <optional>
#include <string>
#include <vector>

#include "saddlelab/landscape.hpp"
#include "saddlelab/oracle.hpp"

namespace saddlelab {

/// A compact box K = [lo, hi] with a sampling budget and seed.
struct RegionProbe {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int sample_count = 1000;
  std::uint64_t seed = 0;

  static RegionProbe cube(int dimension, double lo, double hi, int sample_count,
                          std::uint64_t seed);
  void validate() const;
  Eigen::VectorXd sample(RandomStream& rng) const;
};

struct SmoothnessEstimate {
  double lipschitz = 0;         // max ||grad f(x) - grad f(y)|| / ||x - y|| over pairs
  int descent_violations = 0;   // pairs breaking the quadratic upper bound with L = lipschitz
  int pairs = 0;
};

struct ShellMinimum {
  double radius = 0;
  double min_grad_norm = 0;
};

struct AbcFit {
  double a = 0;
  double b = 0;
  double c = 0;
  double residual = 0;           // max positive holdout violation, raw units
  double residual_in_se = 0;     // max positive holdout violation over the standard error of
                                 // (holdout estimate - fitted prediction)
  int fit_points = 0;
  int holdout_points = 0;
};

struct ExcitationEstimate {
  double b_hat = 0;
  std::vector<double> direction_means;  // per direction, in generation order
};

struct LocalBoundEstimate {
  double observed = 0;        // max ||g(x, xi)|| seen
  double gradient_bound = 0;  // max over K of ||grad f||
  double analytic_bound = 0;  // gradient_bound + noise radius
  bool pass = false;
};

SmoothnessEstimate probe_smoothness(const Objective<double>& objective, const RegionProbe& probe);

/// Minimum gradient norm over uniformly sampled points on each sphere.
std::vector<ShellMinimum> probe_nonflatness(const Objective<double>& objective,
                                            const std::vector<double>& radii,
                                            int samples_per_shell, std::uint64_t seed);

/// Passes when every shell minimum from the second radius onward is >= threshold.
bool nonflatness_holds(const std::vector<ShellMinimum>& shells, double threshold = 0.1);

/// Weighted nonnegative least squares of Monte Carlo E||g||^2 against
/// (f - f*, ||grad f||^2, 1), checked on a disjoint holdout sample.
AbcFit fit_abc(const NoiseOracle<double>& oracle, const RegionProbe& probe, int draws_per_point);

/// Minimum over random unit directions of mean max(<g - grad f, v>, 0).
/// Direction k is the same for every `directions` count, so estimates for
/// nested direction sets are monotone.
ExcitationEstimate estimate_excitation(const NoiseOracle<double>& oracle,
                                       const Eigen::VectorXd& x, int directions, int draws,
                                       std::uint64_t seed);

/// Mean of max(<g - grad f, v>, 0) along one fixed unit direction.
double excitation_along(const NoiseOracle<double>& oracle, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& direction, int draws, std::uint64_t seed);

/// Maximum of ||grad f|| over the box: dense grid followed by projected ascent.
double max_gradient_norm(const Objective<double>& objective, const RegionProbe& probe);

LocalBoundEstimate probe_local_bound(const NoiseOracle<double>& oracle, const RegionProbe& probe,
                                     int draws);

struct Verdict {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string threshold;  // human-readable rule that produced the verdict
};

struct CheckSettings {
  RegionProbe probe;
  int abc_draws_per_point = 1000;
  int excitation_directions = 64;
  int excitation_draws = 100000;
  std::vector<double> radii{5.0, 10.0, 20.0};
  int shell_samples = 1000;
  double nonflat_threshold = 0.1;
  int local_bound_draws = 100000;
};

struct AssumptionReport {
  SmoothnessEstimate smoothness;
  std::vector<ShellMinimum> nonflat_shell_minima;
  std::optional<AbcFit> abc_fit;  // empty when the objective is unbounded below
  ExcitationEstimate excitation;
  Eigen::VectorXd excitation_point;
  LocalBoundEstimate local_bound;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
};

AssumptionReport check_assumptions(const NoiseOracle<double>& oracle,
                                   const CheckSettings& settings);

}  // namespace saddlelab

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

#include "saddlelab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace saddlelab {

const char* to_string(TerminalClass c) {
  switch (c) {
    case TerminalClass::SaddleComponent: return "saddle_component";
    case TerminalClass::MinimumComponent: return "minimum_component";
    case TerminalClass::Diverged: return "diverged";
    case TerminalClass::Unresolved: return "unresolved";
  }
  return "unknown";
}

void TrialConfig::validate() const {
  if (horizon < 1000) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1000");
  if (record_stride < 1) throw Error(ErrorCode::InvalidArgument, "record_stride must be >= 1");
  if (!(saddle_tolerance > 0) || !(minimum_tolerance > 0)) {
    throw Error(ErrorCode::InvalidArgument, "classification tolerances must be positive");
  }
  if (init.center.size() != objective().dimension()) {
    throw Error(ErrorCode::InvalidArgument, "initial point dimension does not match objective");
  }
  if (!(init.radius >= 0)) throw Error(ErrorCode::InvalidArgument, "init radius must be >= 0");
}

std::pair<TerminalClass, int> classify_terminal(const Objective<double>& objective,
                                                const Eigen::VectorXd& x,
                                                double saddle_tolerance,
                                                double minimum_tolerance) {
  const auto& comps = objective.critical_components();
  int nearest_saddle = -1;
  int nearest_minimum = -1;
  double saddle_dist = std::numeric_limits<double>::infinity();
  double minimum_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double d = comps[k].distance(x);
    if (comps[k].is_saddle()) {
      if (d < saddle_dist) {
        saddle_dist = d;
        nearest_saddle = static_cast<int>(k);
      }
    } else if (d < minimum_dist) {
      minimum_dist = d;
      nearest_minimum = static_cast<int>(k);
    }
  }
  if (nearest_saddle >= 0 && saddle_dist < saddle_tolerance) {
    return {TerminalClass::SaddleComponent, nearest_saddle};
  }
  const bool clear_of_saddles = nearest_saddle < 0 || saddle_dist > saddle_tolerance;
  if (nearest_minimum >= 0 && minimum_dist < minimum_tolerance && clear_of_saddles) {
    return {TerminalClass::MinimumComponent, nearest_minimum};
  }
  return {TerminalClass::Unresolved, -1};
}

namespace {

TrialRow make_row(const Objective<double>& f, std::int64_t n, const MethodState<double>& s,
                  const Eigen::VectorXd& grad, const Eigen::VectorXd& martingale) {
  TrialRow row;
  row.n = n;
  row.x = s.x;
  row.f = f.value(s.x);
  row.grad_norm = grad.norm();
  row.v_norm = s.v.norm();
  row.distances.reserve(f.critical_components().size());
  for (const auto& c : f.critical_components()) row.distances.push_back(c.distance(s.x));
  row.martingale_norm = martingale.norm();
  return row;
}

Eigen::VectorXd draw_initial_point(const InitialSampler& init, RandomStream& rng) {
  if (init.radius == 0) return init.center;
  const auto d = init.center.size();
  Eigen::VectorXd u(d);
  for (Eigen::Index i = 0; i < d; i += 2) {
    const auto pair = rng.normal_pair();
    u[i] = pair[0];
    if (i + 1 < d) u[i + 1] = pair[1];
  }
  const double r = init.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
  return init.center + (r / u.norm()) * u;
}

}  // namespace

TrialResult run_trial(const TrialConfig& config, std::int64_t trial_index) {
  config.validate();
  const auto& f = config.objective();
  const auto& oracle = config.oracle;
  const auto& method = config.method;
  const int d = f.dimension();

  RandomStream rng(config.master_seed, static_cast<std::uint64_t>(trial_index));
  MethodState<double> state = init(method, draw_initial_point(config.init, rng));

  TrialResult result;
  result.trial_index = trial_index;
  result.martingale = Eigen::VectorXd::Zero(d);
  result.rows.reserve(static_cast<std::size_t>(config.horizon / config.record_stride + 2));

  Eigen::VectorXd grad(d);
  Eigen::VectorXd noise(d);
  Eigen::VectorXd g(d);
  f.gradient(state.x, grad);
  result.rows.push_back(make_row(f, 0, state, grad, result.martingale));

  for (std::int64_t n = 1; n <= config.horizon; ++n) {
    const double alpha = method.schedule.step(n);
    // grad holds grad f(x_n) here.
    oracle.sample_noise(rng, noise);
    g = grad + noise;
    try {
      step(method, state, g, alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      result.diverged_at = n;
      break;
    }
    result.martingale += alpha * (grad - g);
    f.gradient(state.x, grad);
    if (n % config.record_stride == 0 || n == config.horizon) {
      result.rows.push_back(make_row(f, n, state, grad, result.martingale));
    }
  }

  if (result.diverged_at) {
    result.final_point = state.x_prev;  // last finite iterate
    result.final_grad_norm = std::numeric_limits<double>::infinity();
    result.classification = TerminalClass::Diverged;
    return result;
  }
  result.final_point = state.x;
  result.final_grad_norm = grad.norm();
  std::tie(result.classification, result.component) =
      classify_terminal(f, state.x, config.saddle_tolerance, config.minimum_tolerance);
  return result;
}

ProportionInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw Error(ErrorCode::InvalidArgument, "wilson interval needs trials > 0");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The bound at an observed 0 or 1 is exact; cancellation would leave dust.
  const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {p, lower, upper};
}

namespace {

constexpr int kRateBins = 20;
constexpr std::size_t kMinTailRows = 50;

struct TailWindow {
  double start = 0;
  double end = 0;
};

TailWindow tail_window(std::int64_t horizon, double tail_fraction) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");
  }
  return {std::max(1.0, (1.0 - tail_fraction) * static_cast<double>(horizon)),
          static_cast<double>(horizon)};
}

int bin_of(double n, const TailWindow& w) {
  if (w.end <= w.start) return 0;
  const double t = std::log(n / w.start) / std::log(w.end / w.start);
  return std::clamp(static_cast<int>(t * kRateBins), 0, kRateBins - 1);
}

RateFit fit_binned(const std::vector<double>& bin_max, const TailWindow& w) {
  RateFit fit;
  const double width = std::log(w.end / w.start) / kRateBins;
  for (int b = 0; b < kRateBins; ++b) {
    const double m = bin_max[static_cast<std::size_t>(b)];
    if (!(m > 0) || !std::isfinite(m)) continue;
    fit.bin_centers.push_back(w.start * std::exp((b + 0.5) * width));
    fit.bin_max.push_back(m);
  }
  const std::size_t k = fit.bin_centers.size();
  if (k < 3) throw Error(ErrorCode::InsufficientData, "fewer than 3 non-empty rate bins");
  Eigen::VectorXd lx(static_cast<Eigen::Index>(k));
  Eigen::VectorXd ly(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    lx[static_cast<Eigen::Index>(i)] = std::log(fit.bin_centers[i]);
    ly[static_cast<Eigen::Index>(i)] = std::log(fit.bin_max[i]);
  }
  const double mx = lx.mean();
  const double my = ly.mean();
  const Eigen::VectorXd cx = lx.array() - mx;
  const Eigen::VectorXd cy = ly.array() - my;
  const double sxx = cx.squaredNorm();
  fit.slope = cx.dot(cy) / sxx;
  fit.intercept = my - fit.slope * mx;
  const double rss = (cy - fit.slope * cx).squaredNorm();
  fit.band = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return fit;
}

}  // namespace

RateFit fit_velocity_rate(const TrialResult& result, double tail_fraction) {
  return fit_velocity_envelope({result}, tail_fraction);
}

RateFit fit_velocity_envelope(const std::vector<TrialResult>& results, double tail_fraction) {
  std::int64_t horizon = 0;
  for (const auto& r : results) horizon = std::max(horizon, r.steps());
  const TailWindow w = tail_window(horizon, tail_fraction);
  std::vector<double> bin_max(kRateBins, 0.0);
  std::vector<std::int64_t> steps_seen;
  for (const auto& r : results) {
    for (const auto& row : r.rows) {
      const double n = static_cast<double>(row.n);
      if (row.n < 1 || n < w.start) continue;
      steps_seen.push_back(row.n);
      auto& m = bin_max[static_cast<std::size_t>(bin_of(n, w))];
      m = std::max(m, row.v_norm);
    }
  }
  std::sort(steps_seen.begin(), steps_seen.end());
  steps_seen.erase(std::unique(steps_seen.begin(), steps_seen.end()), steps_seen.end());
  if (steps_seen.size() < kMinTailRows) {
    throw Error(ErrorCode::InsufficientData,
                "tail window holds " + std::to_string(steps_seen.size()) +
                    " recorded steps; at least 50 are required");
  }
  return fit_binned(bin_max, w);
}

MartingaleCheck check_martingale(const std::vector<TrialResult>& results,
                                 const NoiseOracle<double>& oracle,
                                 const StepSchedule<double>& schedule) {
  // Every built-in noise model has a state-independent second moment.
  MartingaleCheck check;
  std::int64_t horizon = -1;
  double total = 0;
  for (const auto& r : results) {
    if (r.diverged_at) continue;
    if (horizon < 0) horizon = r.steps();
    if (r.steps() != horizon) {
      throw Error(ErrorCode::InvalidArgument, "martingale check needs a common horizon");
    }
    total += r.martingale.squaredNorm();
    ++check.trials;
  }
  if (check.trials < 50) {
    throw Error(ErrorCode::InsufficientData,
                "martingale check needs >= 50 non-diverged trials, got " +
                    std::to_string(check.trials));
  }
  check.mean_square_norm = total / check.trials;
  check.expected = oracle.noise_second_moment() * schedule.square_sum(horizon);
  if (check.expected > 0) {
    check.ratio = check.mean_square_norm / check.expected;
    check.pass = *check.ratio >= 0.7 && *check.ratio <= 1.3;
  } else {
    check.pass = check.mean_square_norm == 0;
  }
  return check;
}

namespace {
double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}
}  // namespace

GradientSummary gradient_convergence_summary(const std::vector<TrialResult>& results) {
  if (results.size() < 10) {
    throw Error(ErrorCode::InsufficientData, "gradient summary needs >= 10 trials");
  }
  std::vector<double> norms;
  norms.reserve(results.size());
  for (const auto& r : results) norms.push_back(r.final_grad_norm);
  std::sort(norms.begin(), norms.end());
  return {quantile_sorted(norms, 0.5), quantile_sorted(norms, 0.25), quantile_sorted(norms, 0.75)};
}

EscapeReport summarize(const TrialConfig& config, const std::vector<TrialResult>& results,
                       double tail_fraction) {
  EscapeReport report;
  report.trials = static_cast<std::int64_t>(results.size());
  report.tail_fraction = tail_fraction;
  const auto& comps = config.objective().critical_components();
  for (const auto& c : comps) report.component_counts[c.label] = 0;
  for (const auto& r : results) {
    switch (r.classification) {
      case TerminalClass::SaddleComponent: ++report.saddle_count; break;
      case TerminalClass::MinimumComponent: ++report.minimum_count; break;
      case TerminalClass::Diverged: ++report.diverged_count; break;
      case TerminalClass::Unresolved: ++report.unresolved_count; break;
    }
    if (r.component >= 0) ++report.component_counts[comps[static_cast<std::size_t>(r.component)].label];
  }
  report.saddle_fraction = wilson_interval(report.saddle_count, report.trials);
  report.final_gradient = gradient_convergence_summary(results);
  try {
    report.velocity_fit = fit_velocity_envelope(results, tail_fraction);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
  }
  try {
    report.martingale = check_martingale(results, config.oracle, config.method.schedule);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
  }
  return report;
}

std::vector<TrialResult> run_trials(const TrialConfig& config, std::int64_t count,
                                    int parallelism) {
  config.validate();
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "trial count must be positive");
  std::vector<TrialResult> results(static_cast<std::size_t>(count));
  const int workers =
      static_cast<int>(std::clamp<std::int64_t>(parallelism < 1 ? 1 : parallelism, 1, count));
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  auto work = [&](int worker) {
    try {
      for (std::int64_t k = next++; k < count; k = next++) {
        results[static_cast<std::size_t>(k)] = run_trial(config, k);
      }
    } catch (...) {
      failures[static_cast<std::size_t>(worker)] = std::current_exception();
      next = count;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

MonteCarloRun run_monte_carlo(const TrialConfig& config, std::int64_t count, int parallelism,
                              double tail_fraction) {
  if (count < 10) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs >= 10 trials");
  MonteCarloRun run;
  run.trials = run_trials(config, count, parallelism);
  run.report = summarize(config, run.trials, tail_fraction);
  return run;
}

}  // namespace saddlelab

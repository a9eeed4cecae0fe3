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

#include "saddlelab/assumptions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace saddlelab {
namespace {

// Stream ids inside a probe's seed space.
constexpr std::uint64_t kPairStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kHoldoutStream = 3;
constexpr std::uint64_t kDirectionStream = 4;
constexpr std::uint64_t kNoiseStream = 5;
constexpr std::uint64_t kLocalBoundStream = 6;
constexpr std::uint64_t kShellStreamBase = 1000;

Eigen::VectorXd random_unit_vector(int d, RandomStream& rng) {
  Eigen::VectorXd u(d);
  do {
    for (int i = 0; i < d; i += 2) {
      const auto pair = rng.normal_pair();
      u[i] = pair[0];
      if (i + 1 < d) u[i + 1] = pair[1];
    }
  } while (u.norm() == 0.0);
  return u / u.norm();
}

struct MomentSample {
  double f_gap = 0;
  double grad_sq = 0;
  double mean_sq = 0;
  double standard_error = 0;
};

MomentSample sample_second_moment(const NoiseOracle<double>& oracle, double f_star,
                                  const Eigen::VectorXd& x, int draws, RandomStream& rng) {
  const auto& f = oracle.base();
  Eigen::VectorXd grad = f.gradient(x);
  Eigen::VectorXd noise(f.dimension());
  Eigen::VectorXd g(f.dimension());
  double sum = 0;
  double sum_sq = 0;
  for (int k = 0; k < draws; ++k) {
    oracle.sample_noise(rng, noise);
    g = grad + noise;
    const double s = g.squaredNorm();
    sum += s;
    sum_sq += s * s;
  }
  MomentSample m;
  m.f_gap = f.value(x) - f_star;
  m.grad_sq = grad.squaredNorm();
  m.mean_sq = sum / draws;
  const double var = draws > 1 ? std::max(0.0, (sum_sq - draws * m.mean_sq * m.mean_sq) / (draws - 1))
                               : 0.0;
  m.standard_error = std::sqrt(var / draws);
  return m;
}

double floored_se(const MomentSample& m) {
  return std::max(m.standard_error, 1e-9 * std::max(1.0, std::abs(m.mean_sq)));
}

// Weighted NNLS in three unknowns by enumerating supports: the optimum is the
// unconstrained solution on its own support, so the best feasible support
// solution is exact.
Eigen::Vector3d nnls3(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                      const Eigen::VectorXd& weights) {
  const Eigen::VectorXd sw = weights.cwiseSqrt();
  const Eigen::MatrixXd wx = sw.asDiagonal() * design;
  const Eigen::VectorXd wy = sw.cwiseProduct(target);
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  double best_loss = wy.squaredNorm();
  for (int mask = 1; mask < 8; ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < 3; ++j) {
      if (mask & (1 << j)) cols.push_back(j);
    }
    Eigen::MatrixXd sub(wx.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = wx.col(cols[k]);
    const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(wy);
    if ((sol.array() < 0.0).any() || !sol.allFinite()) continue;
    Eigen::Vector3d theta = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < cols.size(); ++k) theta[cols[k]] = sol[static_cast<Eigen::Index>(k)];
    const double loss = (wx * theta - wy).squaredNorm();
    if (loss < best_loss) {
      best_loss = loss;
      best = theta;
    }
  }
  return best;
}

}  // namespace

RegionProbe RegionProbe::cube(int dimension, double lo, double hi, int sample_count,
                              std::uint64_t seed) {
  RegionProbe p{Eigen::VectorXd::Constant(dimension, lo), Eigen::VectorXd::Constant(dimension, hi),
                sample_count, seed};
  p.validate();
  return p;
}

void RegionProbe::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw Error(ErrorCode::InvalidArgument, "probe box bounds must be non-empty and equal-sized");
  }
  if (!(lo.array() < hi.array()).all()) {
    throw Error(ErrorCode::InvalidArgument, "probe box requires lo < hi componentwise");
  }
  if (sample_count < 100) {
    throw Error(ErrorCode::InvalidArgument, "probe sample_count must be >= 100");
  }
}

Eigen::VectorXd RegionProbe::sample(RandomStream& rng) const {
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform01();
  return x;
}

SmoothnessEstimate probe_smoothness(const Objective<double>& objective, const RegionProbe& probe) {
  probe.validate();
  RandomStream rng(probe.seed, kPairStream);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  pairs.reserve(static_cast<std::size_t>(probe.sample_count));
  SmoothnessEstimate est;
  for (int k = 0; k < probe.sample_count; ++k) {
    Eigen::VectorXd x = probe.sample(rng);
    Eigen::VectorXd y = probe.sample(rng);
    const double dist = (x - y).norm();
    if (dist > 0) {
      est.lipschitz = std::max(
          est.lipschitz, (objective.gradient(x) - objective.gradient(y)).norm() / dist);
    }
    pairs.emplace_back(std::move(x), std::move(y));
  }
  est.pairs = static_cast<int>(pairs.size());
  for (const auto& [x, y] : pairs) {
    const double upper = objective.value(x) + objective.gradient(x).dot(y - x) +
                         0.5 * est.lipschitz * (y - x).squaredNorm();
    const double fy = objective.value(y);
    if (fy > upper + 1e-12 * (1.0 + std::abs(fy))) ++est.descent_violations;
  }
  return est;
}

std::vector<ShellMinimum> probe_nonflatness(const Objective<double>& objective,
                                            const std::vector<double>& radii,
                                            int samples_per_shell, std::uint64_t seed) {
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
    throw Error(ErrorCode::InvalidArgument, "non-flatness radii must be strictly increasing");
  }
  if (samples_per_shell < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples_per_shell must be positive");
  }
  std::vector<ShellMinimum> shells;
  for (std::size_t r = 0; r < radii.size(); ++r) {
    if (!(radii[r] > 0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    RandomStream rng(seed, kShellStreamBase + r);
    double lowest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples_per_shell; ++k) {
      const Eigen::VectorXd x = radii[r] * random_unit_vector(objective.dimension(), rng);
      lowest = std::min(lowest, objective.gradient(x).norm());
    }
    shells.push_back({radii[r], lowest});
  }
  return shells;
}

bool nonflatness_holds(const std::vector<ShellMinimum>& shells, double threshold) {
  for (std::size_t k = 1; k < shells.size(); ++k) {
    if (!(shells[k].min_grad_norm >= threshold)) return false;
  }
  return !shells.empty();
}

AbcFit fit_abc(const NoiseOracle<double>& oracle, const RegionProbe& probe, int draws_per_point) {
  probe.validate();
  const auto f_star = oracle.base().lower_bound();
  if (!f_star) {
    throw Error(ErrorCode::UnboundedBelow,
                "objective '" + oracle.base().name() + "' has no finite lower bound");
  }
  if (draws_per_point < 2) {
    throw Error(ErrorCode::InvalidArgument, "draws_per_point must be >= 2");
  }
  const int n = probe.sample_count;
  RandomStream fit_rng(probe.seed, kFitStream);
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  Eigen::VectorXd weights(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = probe.sample(fit_rng);
    const MomentSample m = sample_second_moment(oracle, *f_star, x, draws_per_point, fit_rng);
    design.row(i) << m.f_gap, m.grad_sq, 1.0;
    target[i] = m.mean_sq;
    const double se = floored_se(m);
    weights[i] = 1.0 / (se * se);
  }
  // Normalize weights to unit mean so the QR sees well-scaled columns.
  const Eigen::VectorXd raw_weights = weights;
  weights /= weights.mean();
  const Eigen::Vector3d theta = nnls3(design, target, weights);

  // Covariance of the fitted coefficients on the active support, used to
  // give each holdout violation the standard error of a difference.
  std::vector<int> active;
  for (int j = 0; j < 3; ++j) {
    if (theta[j] > 0) active.push_back(j);
  }
  Eigen::MatrixXd active_design(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    active_design.col(static_cast<Eigen::Index>(k)) = design.col(active[k]);
  }
  Eigen::MatrixXd coef_cov = Eigen::MatrixXd::Zero(active_design.cols(), active_design.cols());
  if (!active.empty()) {
    const Eigen::MatrixXd info =
        active_design.transpose() * raw_weights.asDiagonal() * active_design;
    coef_cov = info.ldlt().solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  }

  AbcFit fit;
  fit.a = theta[0];
  fit.b = theta[1];
  fit.c = theta[2];
  fit.fit_points = n;
  fit.holdout_points = n;
  RandomStream holdout_rng(probe.seed, kHoldoutStream);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = probe.sample(holdout_rng);
    const MomentSample m = sample_second_moment(oracle, *f_star, x, draws_per_point, holdout_rng);
    const double predicted = fit.a * m.f_gap + fit.b * m.grad_sq + fit.c;
    const double excess = m.mean_sq - predicted;
    Eigen::VectorXd row(static_cast<Eigen::Index>(active.size()));
    const double regressors[3] = {m.f_gap, m.grad_sq, 1.0};
    for (std::size_t k = 0; k < active.size(); ++k) {
      row[static_cast<Eigen::Index>(k)] = regressors[active[k]];
    }
    const double se = floored_se(m);
    const double prediction_var = active.empty() ? 0.0 : row.dot(coef_cov * row);
    fit.residual = std::max(fit.residual, excess);
    fit.residual_in_se =
        std::max(fit.residual_in_se, excess / std::sqrt(se * se + std::max(0.0, prediction_var)));
  }
  return fit;
}

ExcitationEstimate estimate_excitation(const NoiseOracle<double>& oracle,
                                       const Eigen::VectorXd& x, int directions, int draws,
                                       std::uint64_t seed) {
  if (directions < 1 || draws < 1) {
    throw Error(ErrorCode::InvalidArgument, "directions and draws must be positive");
  }
  const int d = oracle.dimension();
  RandomStream dir_rng(seed, kDirectionStream);
  Eigen::MatrixXd dirs(d, directions);
  for (int k = 0; k < directions; ++k) dirs.col(k) = random_unit_vector(d, dir_rng);

  RandomStream noise_rng(seed, kNoiseStream);
  const Eigen::VectorXd grad = oracle.base().gradient(x);
  Eigen::VectorXd g(d);
  Eigen::VectorXd noise(d);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(directions);
  Eigen::RowVectorXd proj(directions);
  for (int k = 0; k < draws; ++k) {
    oracle.sample_gradient(x, noise_rng, g);
    noise = g - grad;
    proj.noalias() = noise.transpose() * dirs;
    sums += proj.transpose().cwiseMax(0.0);
  }
  ExcitationEstimate est;
  est.direction_means.resize(static_cast<std::size_t>(directions));
  for (int k = 0; k < directions; ++k) est.direction_means[static_cast<std::size_t>(k)] = sums[k] / draws;
  est.b_hat = *std::min_element(est.direction_means.begin(), est.direction_means.end());
  return est;
}

double excitation_along(const NoiseOracle<double>& oracle, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& direction, int draws, std::uint64_t seed) {
  const Eigen::VectorXd v = direction / direction.norm();
  RandomStream noise_rng(seed, kNoiseStream);
  const Eigen::VectorXd grad = oracle.base().gradient(x);
  Eigen::VectorXd g(oracle.dimension());
  double sum = 0;
  for (int k = 0; k < draws; ++k) {
    oracle.sample_gradient(x, noise_rng, g);
    sum += std::max(0.0, (g - grad).dot(v));
  }
  return sum / draws;
}

double max_gradient_norm(const Objective<double>& objective, const RegionProbe& probe) {
  probe.validate();
  const int d = objective.dimension();
  const int per_axis = std::clamp(static_cast<int>(std::pow(1e6, 1.0 / d)), 3, 10001);
  const long total = static_cast<long>(std::pow(per_axis, d));

  struct Candidate {
    double norm;
    Eigen::VectorXd x;
  };
  std::vector<Candidate> top;
  constexpr std::size_t kKeep = 8;
  Eigen::VectorXd x(d);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    for (int i = 0; i < d; ++i) {
      const long k = rest % per_axis;
      rest /= per_axis;
      x[i] = probe.lo[i] + (probe.hi[i] - probe.lo[i]) * static_cast<double>(k) / (per_axis - 1);
    }
    const double norm = objective.gradient(x).norm();
    if (top.size() < kKeep || norm > top.back().norm) {
      top.push_back({norm, x});
      std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.norm > b.norm; });
      if (top.size() > kKeep) top.pop_back();
    }
  }

  // Projected ascent on ||grad f||^2 / 2, whose gradient is H grad f.
  double best = top.front().norm;
  for (auto& cand : top) {
    Eigen::VectorXd y = cand.x;
    double value = cand.norm;
    double step = 0.1 * (probe.hi - probe.lo).maxCoeff();
    for (int it = 0; it < 200 && step > 1e-14; ++it) {
      const Eigen::VectorXd grad = objective.gradient(y);
      Eigen::VectorXd ascent = objective.hessian(y) * grad;
      const double an = ascent.norm();
      if (an == 0) break;
      ascent /= an;
      const Eigen::VectorXd trial = (y + step * ascent).cwiseMax(probe.lo).cwiseMin(probe.hi);
      const double tv = objective.gradient(trial).norm();
      if (tv > value) {
        y = trial;
        value = tv;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return best;
}

LocalBoundEstimate probe_local_bound(const NoiseOracle<double>& oracle, const RegionProbe& probe,
                                     int draws) {
  probe.validate();
  RandomStream rng(probe.seed, kLocalBoundStream);
  Eigen::VectorXd g(oracle.dimension());
  LocalBoundEstimate est;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd x = probe.sample(rng);
    oracle.sample_gradient(x, rng, g);
    est.observed = std::max(est.observed, g.norm());
  }
  est.gradient_bound = max_gradient_norm(oracle.base(), probe);
  est.analytic_bound = est.gradient_bound + oracle.noise_radius();
  est.pass = est.observed <= est.analytic_bound * (1.0 + 1e-12);
  return est;
}

bool AssumptionReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.pass || v.skipped; });
}

AssumptionReport check_assumptions(const NoiseOracle<double>& oracle,
                                   const CheckSettings& settings) {
  const auto& f = oracle.base();
  const RegionProbe& probe = settings.probe;
  AssumptionReport report;

  report.smoothness = probe_smoothness(f, probe);
  // L_hat is a secant estimate, so a few descent-lemma misses at L = L_hat
  // are expected where curvature peaks between sampled endpoints. They are
  // reported, not judged.
  report.verdicts.push_back({"smoothness", std::isfinite(report.smoothness.lipschitz), false,
                             "L_hat finite on the box"});

  report.nonflat_shell_minima =
      probe_nonflatness(f, settings.radii, settings.shell_samples, probe.seed);
  report.verdicts.push_back(
      {"nonflatness", nonflatness_holds(report.nonflat_shell_minima, settings.nonflat_threshold),
       false,
       "min ||grad f|| >= " + std::to_string(settings.nonflat_threshold) +
           " on every shell from the second radius"});

  if (f.lower_bound()) {
    report.abc_fit = fit_abc(oracle, probe, settings.abc_draws_per_point);
    report.verdicts.push_back({"abc", report.abc_fit->residual_in_se <= 4.0, false,
                               "holdout violation <= 4 standard errors"});
  } else {
    report.verdicts.push_back({"abc", false, true, "skipped: objective unbounded below"});
  }

  report.excitation_point = 0.5 * (probe.lo + probe.hi);
  report.excitation =
      estimate_excitation(oracle, report.excitation_point, settings.excitation_directions,
                          settings.excitation_draws, probe.seed);
  report.verdicts.push_back(
      {"excitation", report.excitation.b_hat > 0.0, false, "b_hat > 0"});

  report.local_bound = probe_local_bound(oracle, probe, settings.local_bound_draws);
  report.verdicts.push_back({"local_boundedness", report.local_bound.pass, false,
                             "max ||g|| <= max_K ||grad f|| + noise radius"});
  return report;
}

}  // namespace saddlelab

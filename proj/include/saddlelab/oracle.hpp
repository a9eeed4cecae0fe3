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

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "saddlelab/error.hpp"
#include "saddlelab/landscape.hpp"
#include "saddlelab/random.hpp"

namespace saddlelab {

enum class NoiseModel { Exact, Sphere, Rademacher, FiniteSum };

inline const char* to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::Exact: return "exact";
    case NoiseModel::Sphere: return "sphere";
    case NoiseModel::Rademacher: return "rademacher";
    case NoiseModel::FiniteSum: return "finite_sum";
  }
  return "unknown";
}

inline NoiseModel noise_model_from_string(std::string_view s) {
  if (s == "exact") return NoiseModel::Exact;
  if (s == "sphere") return NoiseModel::Sphere;
  if (s == "rademacher") return NoiseModel::Rademacher;
  if (s == "finite_sum") return NoiseModel::FiniteSum;
  throw Error(ErrorCode::InvalidArgument, "unknown oracle model '" + std::string(s) + "'");
}

template <typename Scalar>
struct AbcConstants {
  Scalar a = 0;
  Scalar b = 0;
  Scalar c = 0;
};

/// Unbiased stochastic gradient g(x, xi) = grad f(x) + noise.
///
/// Raw draws consumed per sample (see RandomStream):
///   exact       0
///   sphere      2 * ceil(d / 2)   normalized Box-Muller Gaussians
///   rademacher  d                 one sign per coordinate (top bit)
///   finite_sum  1                 index into the 2d perturbations +-c e_j
///
/// finite_sum(c) is the average of the 2d component functions f +- c x_j,
/// drawn uniformly.
template <typename Scalar = double>
class NoiseOracle {
 public:
  using VectorType = Vector<Scalar>;

  NoiseOracle(Objective<Scalar> base, NoiseModel model, Scalar magnitude = Scalar(0))
      : base_(std::move(base)), model_(model), magnitude_(magnitude) {
    if (model_ == NoiseModel::Exact) magnitude_ = Scalar(0);
    if (!(magnitude_ >= Scalar(0)) || !std::isfinite(double(magnitude_))) {
      throw Error(ErrorCode::InvalidArgument, "noise magnitude must be finite and >= 0");
    }
  }

  static NoiseOracle exact(Objective<Scalar> base) {
    return NoiseOracle(std::move(base), NoiseModel::Exact);
  }
  static NoiseOracle sphere(Objective<Scalar> base, Scalar sigma) {
    return NoiseOracle(std::move(base), NoiseModel::Sphere, sigma);
  }
  static NoiseOracle rademacher(Objective<Scalar> base, Scalar sigma) {
    return NoiseOracle(std::move(base), NoiseModel::Rademacher, sigma);
  }
  static NoiseOracle finite_sum(Objective<Scalar> base, Scalar c) {
    return NoiseOracle(std::move(base), NoiseModel::FiniteSum, c);
  }

  const Objective<Scalar>& base() const { return base_; }
  NoiseModel model() const { return model_; }
  /// sigma for sphere/rademacher, c for finite_sum, 0 for exact.
  Scalar magnitude() const { return magnitude_; }
  int dimension() const { return base_.dimension(); }

  int draws_per_sample() const {
    const int d = dimension();
    switch (model_) {
      case NoiseModel::Exact: return 0;
      case NoiseModel::Sphere: return 2 * ((d + 1) / 2);
      case NoiseModel::Rademacher: return d;
      case NoiseModel::FiniteSum: return 1;
    }
    return 0;
  }

  void sample_noise(RandomStream& rng, Eigen::Ref<VectorType> noise) const {
    const int d = dimension();
    switch (model_) {
      case NoiseModel::Exact:
        noise.setZero();
        return;
      case NoiseModel::Sphere: {
        for (int i = 0; i < d; i += 2) {
          const auto pair = rng.normal_pair();
          noise[i] = static_cast<Scalar>(pair[0]);
          if (i + 1 < d) noise[i + 1] = static_cast<Scalar>(pair[1]);
        }
        noise *= magnitude_ / noise.norm();
        return;
      }
      case NoiseModel::Rademacher:
        for (int i = 0; i < d; ++i) {
          noise[i] = (rng.next_u64() >> 63) != 0 ? magnitude_ : -magnitude_;
        }
        return;
      case NoiseModel::FiniteSum: {
        const auto j = rng.uniform_index(static_cast<std::uint64_t>(2 * d));
        noise.setZero();
        noise[static_cast<Eigen::Index>(j / 2)] = (j % 2 == 0) ? magnitude_ : -magnitude_;
        return;
      }
    }
  }

  void sample_gradient(const Eigen::Ref<const VectorType>& x, RandomStream& rng,
                       Eigen::Ref<VectorType> out) const {
    VectorType noise(dimension());
    sample_noise(rng, noise);
    base_.gradient(x, out);
    out += noise;
  }

  VectorType sample_gradient(const Eigen::Ref<const VectorType>& x, RandomStream& rng) const {
    VectorType g(dimension());
    sample_gradient(x, rng, g);
    return g;
  }

  /// Declared lower bound b on E[<noise, v>^+] over unit vectors v.
  Scalar analytic_excitation() const {
    const double d = dimension();
    switch (model_) {
      case NoiseModel::Exact: return Scalar(0);
      case NoiseModel::Sphere:
        // sigma * E|U_1| / 2 for U uniform on the sphere; equals sigma / pi in d = 2.
        return magnitude_ * static_cast<Scalar>(std::exp(std::lgamma(d / 2) -
                                                         std::lgamma((d + 1) / 2)) /
                                                (2 * std::sqrt(std::numbers::pi)));
      case NoiseModel::Rademacher:
        // Szarek's sharp Khintchine constant: E|<xi, v>| >= 1/sqrt(2).
        return magnitude_ / (Scalar(2) * std::sqrt(Scalar(2)));
      case NoiseModel::FiniteSum:
        return magnitude_ / static_cast<Scalar>(2 * d);
    }
    return Scalar(0);
  }

  /// E||noise||^2, which is state-independent for every built-in model.
  Scalar noise_second_moment() const {
    switch (model_) {
      case NoiseModel::Exact: return Scalar(0);
      case NoiseModel::Sphere:
      case NoiseModel::FiniteSum: return magnitude_ * magnitude_;
      case NoiseModel::Rademacher:
        return static_cast<Scalar>(dimension()) * magnitude_ * magnitude_;
    }
    return Scalar(0);
  }

  /// Almost-sure bound on ||noise||.
  Scalar noise_radius() const {
    if (model_ == NoiseModel::Rademacher) {
      return magnitude_ * std::sqrt(static_cast<Scalar>(dimension()));
    }
    return magnitude_;
  }

  /// (A, B, C) with E||g||^2 <= A (f - f*) + B ||grad f||^2 + C; here with equality.
  AbcConstants<Scalar> analytic_abc() const {
    if (!base_.lower_bound()) {
      throw Error(ErrorCode::UnboundedBelow,
                  "objective '" + base_.name() + "' is not bounded below");
    }
    return {Scalar(0), Scalar(1), noise_second_moment()};
  }

 private:
  Objective<Scalar> base_;
  NoiseModel model_;
  Scalar magnitude_;
};

}  // namespace saddlelab

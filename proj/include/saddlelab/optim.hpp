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

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include "saddlelab/error.hpp"
#include "saddlelab/landscape.hpp"
#include "saddlelab/schedule.hpp"

namespace saddlelab {

enum class Method { Sgd, Shb, Snag };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Sgd: return "sgd";
    case Method::Shb: return "shb";
    case Method::Snag: return "snag";
  }
  return "unknown";
}

inline Method method_from_string(std::string_view s) {
  if (s == "sgd") return Method::Sgd;
  if (s == "shb") return Method::Shb;
  if (s == "snag") return Method::Snag;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(s) + "'");
}

template <typename Scalar = double>
struct MethodConfig {
  Method method;
  Scalar beta;
  StepSchedule<Scalar> schedule;

  /// Rejects beta outside [0, 1). SGD ignores the requested beta and uses 0.
  static MethodConfig make(Method method, Scalar beta, StepSchedule<Scalar> schedule) {
    if (method == Method::Sgd) beta = Scalar(0);
    if (!(beta >= Scalar(0) && beta < Scalar(1))) {
      throw Error(ErrorCode::InvalidArgument,
                  "momentum beta must lie in [0, 1), got " + std::to_string(double(beta)));
    }
    return MethodConfig{method, beta, schedule};
  }
};

// Non-deduced parameter types: Scalar is fixed by the state argument.
template <typename Scalar>
using Real = std::type_identity_t<Scalar>;
template <typename Scalar>
using GradientArg = const Eigen::Ref<const Vector<std::type_identity_t<Scalar>>>&;

/// beta / (1 - beta), the coefficient linking the two coordinate charts.
template <typename Scalar>
constexpr Scalar momentum_ratio(Scalar beta) {
  return beta / (Scalar(1) - beta);
}

/// Iterate in both charts: x (current), x_prev, v = x - x_prev, and
/// z = x + beta/(1-beta) v.
///
/// SNAG is the one exception to v = x - x_prev: its velocity follows the
/// transformed recursion v+ = beta (v - alpha g) and x is reconstructed
/// as x = z + beta/(1-beta) v, so x_prev holds the true previous iterate while v holds
/// the transformed velocity.
template <typename Scalar = double>
struct MethodState {
  using VectorType = Vector<Scalar>;
  std::int64_t n = 1;
  VectorType x;
  VectorType x_prev;
  VectorType z;
  VectorType v;
};

template <typename Scalar>
MethodState<Scalar> init(const MethodConfig<Scalar>& config, const Vector<Real<Scalar>>& x0) {
  MethodState<Scalar> s;
  s.n = 1;
  s.x = x0;
  s.x_prev = x0;
  s.v = Vector<Scalar>::Zero(x0.size());
  s.z = x0 + momentum_ratio(config.beta) * s.v;
  return s;
}

namespace detail {
template <typename Scalar>
void require_finite(const MethodState<Scalar>& s) {
  if (!s.x.allFinite()) {
    throw Error(ErrorCode::NonFinite,
                "iterate became non-finite at step " + std::to_string(s.n));
  }
}
}  // namespace detail

/// x+ = x - alpha g + beta (x - x_prev).
template <typename Scalar>
void step_primal_shb(MethodState<Scalar>& s, GradientArg<Scalar> g,
                     Real<Scalar> alpha, Real<Scalar> beta) {
  s.x_prev.swap(s.x);
  s.x = s.x_prev - alpha * g + beta * s.v;
  s.v = s.x - s.x_prev;
  s.z = s.x + momentum_ratio(beta) * s.v;
  ++s.n;
  detail::require_finite(s);
}

/// v+ = beta v - alpha g, z+ = z - alpha/(1-beta) g, x+ = x + v+.
template <typename Scalar>
void step_transformed_shb(MethodState<Scalar>& s, GradientArg<Scalar> g,
                          Real<Scalar> alpha, Real<Scalar> beta) {
  s.v = beta * s.v - alpha * g;
  s.z -= (alpha / (Scalar(1) - beta)) * g;
  s.x_prev = s.x;
  s.x += s.v;
  ++s.n;
  detail::require_finite(s);
}

/// v+ = beta (v - alpha g), z+ = z - alpha/(1-beta) g, x+ = z+ + beta/(1-beta) v+.
///
/// In primal terms this is
///   x+ = x - alpha (1 + beta^2)/(1 - beta) g + beta (1 + beta)/(1 - beta) v
/// where v is the transformed velocity carried in the state.
template <typename Scalar>
void step_snag(MethodState<Scalar>& s, GradientArg<Scalar> g, Real<Scalar> alpha,
               Real<Scalar> beta) {
  s.v = beta * (s.v - alpha * g);
  s.z -= (alpha / (Scalar(1) - beta)) * g;
  s.x_prev = s.x;
  s.x = s.z + momentum_ratio(beta) * s.v;
  ++s.n;
  detail::require_finite(s);
}

/// x+ = x - alpha g.
template <typename Scalar>
void step_sgd(MethodState<Scalar>& s, GradientArg<Scalar> g, Real<Scalar> alpha) {
  s.x_prev = s.x;
  s.x -= alpha * g;
  s.v = -alpha * g;
  s.z = s.x;
  ++s.n;
  detail::require_finite(s);
}

/// One update of the configured method using its canonical form.
template <typename Scalar>
void step(const MethodConfig<Scalar>& config, MethodState<Scalar>& s,
          GradientArg<Scalar> g, Real<Scalar> alpha) {
  switch (config.method) {
    case Method::Sgd: step_sgd(s, g, alpha); return;
    case Method::Shb: step_primal_shb(s, g, alpha, config.beta); return;
    case Method::Snag: step_snag(s, g, alpha, config.beta); return;
  }
}

/// Largest violation of the chart identities, scaled by max(1, ||x||).
/// SNAG is checked against its own reconstruction x = z + beta/(1-beta) v
/// and has no velocity identity.
template <typename Scalar>
Scalar chart_inconsistency(const MethodState<Scalar>& s, Method method, Scalar beta) {
  const Scalar scale = std::max(Scalar(1), s.x.norm());
  if (method == Method::Snag) {
    return ((s.x - s.z) - momentum_ratio(beta) * s.v).norm() / scale;
  }
  const Scalar err = std::max(((s.z - s.x) - momentum_ratio(beta) * s.v).norm(),
                              (s.v - (s.x - s.x_prev)).norm());
  return err / scale;
}

}  // namespace saddlelab

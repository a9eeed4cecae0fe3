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
#include <compare>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "saddlelab/error.hpp"

namespace saddlelab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ComponentKind { IsolatedMinimum, IsolatedSaddle, SaddleCircle, MinimumCircle };

inline const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::IsolatedMinimum: return "isolated_minimum";
    case ComponentKind::IsolatedSaddle: return "isolated_saddle";
    case ComponentKind::SaddleCircle: return "saddle_circle";
    case ComponentKind::MinimumCircle: return "minimum_circle";
  }
  return "unknown";
}

inline bool is_saddle_kind(ComponentKind kind) {
  return kind == ComponentKind::IsolatedSaddle || kind == ComponentKind::SaddleCircle;
}

/// Eigenvalue counts below -margin_negative, inside the margins, and above
/// margin_positive.
struct HessianSignature {
  int negative = 0;
  int flat = 0;
  int positive = 0;
  friend auto operator<=>(const HessianSignature&, const HessianSignature&) = default;
};

template <typename Scalar>
HessianSignature signature_of(const Vector<Scalar>& eigenvalues, Scalar margin_negative,
                              Scalar margin_positive) {
  HessianSignature s;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const Scalar lambda = eigenvalues[i];
    if (lambda <= -margin_negative) {
      ++s.negative;
    } else if (lambda >= margin_positive) {
      ++s.positive;
    } else {
      ++s.flat;
    }
  }
  return s;
}

/// A connected piece of the critical set with a closed-form distance.
template <typename Scalar>
struct CriticalComponent {
  std::string label;  // used for dist_<label> output columns
  ComponentKind kind;
  Vector<Scalar> representative;
  std::function<Scalar(const Vector<Scalar>&)> distance;
  /// Point on the component at parameter t (angle for circles; ignored for points).
  std::function<Vector<Scalar>(Scalar)> point_at;
  HessianSignature signature;
  Scalar margin_negative = Scalar(0.5);
  Scalar margin_positive = Scalar(0.5);

  bool is_saddle() const { return is_saddle_kind(kind); }
  int manifold_dimension() const {
    return kind == ComponentKind::SaddleCircle || kind == ComponentKind::MinimumCircle ? 1 : 0;
  }
};

template <typename Scalar>
class ObjectiveModel {
 public:
  virtual ~ObjectiveModel() = default;
  virtual Scalar value(const Eigen::Ref<const Vector<Scalar>>& x) const = 0;
  virtual void gradient(const Eigen::Ref<const Vector<Scalar>>& x,
                        Eigen::Ref<Vector<Scalar>> out) const = 0;
  virtual void hessian(const Eigen::Ref<const Vector<Scalar>>& x,
                       Eigen::Ref<Matrix<Scalar>> out) const = 0;
};

/// Immutable test function: value, gradient, Hessian, and annotated critical
/// components. Cheap to copy; copies share the underlying model.
template <typename Scalar = double>
class Objective {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  Objective(std::string name, int dimension, std::shared_ptr<const ObjectiveModel<Scalar>> model,
            std::vector<CriticalComponent<Scalar>> components, std::optional<Scalar> lower_bound)
      : name_(std::move(name)),
        dimension_(dimension),
        model_(std::move(model)),
        components_(std::make_shared<const std::vector<CriticalComponent<Scalar>>>(
            std::move(components))),
        lower_bound_(lower_bound) {}

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }

  Scalar value(const Eigen::Ref<const VectorType>& x) const { return model_->value(x); }

  void gradient(const Eigen::Ref<const VectorType>& x, Eigen::Ref<VectorType> out) const {
    model_->gradient(x, out);
  }
  VectorType gradient(const Eigen::Ref<const VectorType>& x) const {
    VectorType g(dimension_);
    model_->gradient(x, g);
    return g;
  }

  MatrixType hessian(const Eigen::Ref<const VectorType>& x) const {
    MatrixType h(dimension_, dimension_);
    model_->hessian(x, h);
    return h;
  }

  const std::vector<CriticalComponent<Scalar>>& critical_components() const {
    return *components_;
  }

  /// f* when the function is bounded below; empty otherwise.
  std::optional<Scalar> lower_bound() const { return lower_bound_; }

 private:
  std::string name_;
  int dimension_;
  std::shared_ptr<const ObjectiveModel<Scalar>> model_;
  std::shared_ptr<const std::vector<CriticalComponent<Scalar>>> components_;
  std::optional<Scalar> lower_bound_;
};

namespace detail {

template <typename Scalar>
class DoubleWellModel final : public ObjectiveModel<Scalar> {
 public:
  Scalar value(const Eigen::Ref<const Vector<Scalar>>& x) const override {
    const Scalar a = x[0];
    const Scalar b = x[1];
    return Scalar(0.25) * a * a * a * a - Scalar(0.5) * a * a + Scalar(0.5) * b * b;
  }
  void gradient(const Eigen::Ref<const Vector<Scalar>>& x,
                Eigen::Ref<Vector<Scalar>> out) const override {
    const Scalar a = x[0];
    out[0] = a * a * a - a;
    out[1] = x[1];
  }
  void hessian(const Eigen::Ref<const Vector<Scalar>>& x,
               Eigen::Ref<Matrix<Scalar>> out) const override {
    out.setZero();
    out(0, 0) = Scalar(3) * x[0] * x[0] - Scalar(1);
    out(1, 1) = Scalar(1);
  }
};

// f = z^2/2 + h(x^2 + y^2), h(u) = (u-1)^4/4 - (u-1)^2/2.
template <typename Scalar>
class SaddleCircleModel final : public ObjectiveModel<Scalar> {
 public:
  Scalar value(const Eigen::Ref<const Vector<Scalar>>& x) const override {
    const Scalar w = x[0] * x[0] + x[1] * x[1] - Scalar(1);
    const Scalar w2 = w * w;
    return Scalar(0.5) * x[2] * x[2] + Scalar(0.25) * w2 * w2 - Scalar(0.5) * w2;
  }
  void gradient(const Eigen::Ref<const Vector<Scalar>>& x,
                Eigen::Ref<Vector<Scalar>> out) const override {
    const Scalar w = x[0] * x[0] + x[1] * x[1] - Scalar(1);
    const Scalar dh = w * w * w - w;
    out[0] = Scalar(2) * x[0] * dh;
    out[1] = Scalar(2) * x[1] * dh;
    out[2] = x[2];
  }
  void hessian(const Eigen::Ref<const Vector<Scalar>>& x,
               Eigen::Ref<Matrix<Scalar>> out) const override {
    const Scalar w = x[0] * x[0] + x[1] * x[1] - Scalar(1);
    const Scalar dh = w * w * w - w;
    const Scalar d2h = Scalar(3) * w * w - Scalar(1);
    out.setZero();
    out(0, 0) = Scalar(2) * dh + Scalar(4) * x[0] * x[0] * d2h;
    out(1, 1) = Scalar(2) * dh + Scalar(4) * x[1] * x[1] * d2h;
    out(0, 1) = out(1, 0) = Scalar(4) * x[0] * x[1] * d2h;
    out(2, 2) = Scalar(1);
  }
};

template <typename Scalar>
class QuadraticModel final : public ObjectiveModel<Scalar> {
 public:
  explicit QuadraticModel(Matrix<Scalar> a) : a_(std::move(a)) {}
  Scalar value(const Eigen::Ref<const Vector<Scalar>>& x) const override {
    return Scalar(0.5) * x.dot(a_ * x);
  }
  void gradient(const Eigen::Ref<const Vector<Scalar>>& x,
                Eigen::Ref<Vector<Scalar>> out) const override {
    out.noalias() = a_ * x;
  }
  void hessian(const Eigen::Ref<const Vector<Scalar>>&,
               Eigen::Ref<Matrix<Scalar>> out) const override {
    out = a_;
  }

 private:
  Matrix<Scalar> a_;
};

template <typename Scalar>
CriticalComponent<Scalar> point_component(std::string label, ComponentKind kind,
                                          Vector<Scalar> point, HessianSignature signature) {
  CriticalComponent<Scalar> c;
  c.label = std::move(label);
  c.kind = kind;
  c.representative = point;
  c.distance = [point](const Vector<Scalar>& x) { return (x - point).norm(); };
  c.point_at = [point](Scalar) { return point; };
  c.signature = signature;
  return c;
}

// Horizontal circle of the given radius in the z = 0 plane of R^3.
template <typename Scalar>
CriticalComponent<Scalar> circle_component(std::string label, ComponentKind kind, Scalar radius,
                                           HessianSignature signature) {
  CriticalComponent<Scalar> c;
  c.label = std::move(label);
  c.kind = kind;
  c.representative = Vector<Scalar>::Zero(3);
  c.representative[0] = radius;
  c.distance = [radius](const Vector<Scalar>& x) {
    const Scalar radial = std::hypot(x[0], x[1]) - radius;
    return std::hypot(radial, x[2]);
  };
  c.point_at = [radius](Scalar t) {
    Vector<Scalar> p(3);
    p << radius * std::cos(t), radius * std::sin(t), Scalar(0);
    return p;
  };
  c.signature = signature;
  return c;
}

}  // namespace detail

/// f(x, y) = x^4/4 - x^2/2 + y^2/2. Saddle at the origin, minima at (+-1, 0).
template <typename Scalar = double>
Objective<Scalar> double_well_2d() {
  using V = Vector<Scalar>;
  std::vector<CriticalComponent<Scalar>> components;
  components.push_back(detail::point_component<Scalar>(
      "saddle_origin", ComponentKind::IsolatedSaddle, V::Zero(2), {1, 0, 1}));
  components.push_back(detail::point_component<Scalar>(
      "minimum_plus", ComponentKind::IsolatedMinimum, V::Unit(2, 0), {0, 0, 2}));
  components.push_back(detail::point_component<Scalar>(
      "minimum_minus", ComponentKind::IsolatedMinimum, -V::Unit(2, 0), {0, 0, 2}));
  return Objective<Scalar>("double_well_2d", 2,
                           std::make_shared<detail::DoubleWellModel<Scalar>>(),
                           std::move(components), Scalar(-0.25));
}

/// f(x, y, z) = z^2/2 + h(x^2 + y^2) with h(u) = (u-1)^4/4 - (u-1)^2/2.
///
/// The unit circle is a strict saddle manifold (radial curvature -4). The
/// circle of radius sqrt(2) and the origin are global minima with f = -1/4;
/// the origin is degenerate (quartic in the plane), signature (0, 2, 1).
template <typename Scalar = double>
Objective<Scalar> saddle_circle_3d() {
  std::vector<CriticalComponent<Scalar>> components;
  components.push_back(detail::circle_component<Scalar>("saddle_circle",
                                                        ComponentKind::SaddleCircle, Scalar(1),
                                                        {1, 1, 1}));
  components.push_back(detail::circle_component<Scalar>(
      "minimum_circle", ComponentKind::MinimumCircle, std::sqrt(Scalar(2)), {0, 1, 2}));
  components.push_back(detail::point_component<Scalar>(
      "origin", ComponentKind::IsolatedMinimum, Vector<Scalar>::Zero(3), {0, 2, 1}));
  return Objective<Scalar>("saddle_circle_3d", 3,
                           std::make_shared<detail::SaddleCircleModel<Scalar>>(),
                           std::move(components), Scalar(-0.25));
}

/// f(x) = x^T A x / 2. The origin is annotated from the spectrum of A; the
/// function is bounded below (f* = 0) only when A is positive semidefinite.
template <typename Scalar = double>
Objective<Scalar> quadratic(const Matrix<Scalar>& a, Scalar margin = Scalar(0.5)) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "quadratic matrix must be square and non-empty");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12)) {
    throw Error(ErrorCode::NonSymmetric, "quadratic matrix is not symmetric");
  }
  const int d = static_cast<int>(a.rows());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a, Eigen::EigenvaluesOnly);
  const Vector<Scalar> spectrum = solver.eigenvalues();
  const HessianSignature sig = signature_of<Scalar>(spectrum, margin, margin);
  const ComponentKind kind =
      sig.negative > 0 ? ComponentKind::IsolatedSaddle : ComponentKind::IsolatedMinimum;
  std::vector<CriticalComponent<Scalar>> components;
  auto origin = detail::point_component<Scalar>("origin", kind, Vector<Scalar>::Zero(d), sig);
  origin.margin_negative = margin;
  origin.margin_positive = margin;
  components.push_back(std::move(origin));
  std::optional<Scalar> lower;
  if (spectrum.minCoeff() >= Scalar(0)) lower = Scalar(0);
  return Objective<Scalar>("quadratic", d, std::make_shared<detail::QuadraticModel<Scalar>>(a),
                           std::move(components), lower);
}

enum class CriticalClass { StrictSaddle, Minimum, Degenerate };

inline const char* to_string(CriticalClass c) {
  switch (c) {
    case CriticalClass::StrictSaddle: return "strict_saddle";
    case CriticalClass::Minimum: return "minimum";
    case CriticalClass::Degenerate: return "degenerate";
  }
  return "unknown";
}

template <typename Scalar>
struct CriticalPointClassification {
  CriticalClass kind;
  HessianSignature signature;  // signature.flat counts tangential/flat directions
  Vector<Scalar> eigenvalues;  // ascending
};

/// Classifies a critical point from its Hessian spectrum.
template <typename Scalar>
CriticalPointClassification<Scalar> classify_critical_point(const Objective<Scalar>& objective,
                                                            const Vector<std::type_identity_t<Scalar>>& x,
                                                            std::type_identity_t<Scalar> margin_negative = Scalar(0.5),
                                                            std::type_identity_t<Scalar> margin_positive = Scalar(0.5)) {
  const Scalar grad_norm = objective.gradient(x).norm();
  if (!(grad_norm < Scalar(1e-6))) {
    throw Error(ErrorCode::NotCritical,
                "gradient norm " + std::to_string(double(grad_norm)) + " is not below 1e-6");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(objective.hessian(x),
                                                       Eigen::EigenvaluesOnly);
  CriticalPointClassification<Scalar> out;
  out.eigenvalues = solver.eigenvalues();
  out.signature = signature_of<Scalar>(out.eigenvalues, margin_negative, margin_positive);
  if (out.eigenvalues.minCoeff() <= -margin_negative) {
    out.kind = CriticalClass::StrictSaddle;
  } else if (out.eigenvalues.minCoeff() >= margin_positive) {
    out.kind = CriticalClass::Minimum;
  } else {
    out.kind = CriticalClass::Degenerate;
  }
  return out;
}

/// True when a classification matches an annotated component: same
/// signature (flat count included) and strict-saddle iff saddle kind.
template <typename Scalar>
bool agrees_with(const CriticalPointClassification<Scalar>& c,
                 const CriticalComponent<Scalar>& component) {
  return c.signature == component.signature &&
         ((c.kind == CriticalClass::StrictSaddle) == component.is_saddle());
}

}  // namespace saddlelab

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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "saddlelab/optim.hpp"
#include "saddlelab/oracle.hpp"

using namespace saddlelab;
using Eigen::VectorXd;

namespace {

VectorXd vec(double a, double b) { return (VectorXd(2) << a, b).finished(); }

MethodConfig<double> config(Method m, double beta, double a = 0.1, double p = 0.7) {
  return MethodConfig<double>::make(m, beta, StepSchedule<double>::validate(a, p, 0));
}

}  // namespace

TEST_CASE("init duplicates the starting point") {
  const auto s = init(config(Method::Shb, 0.5), vec(0, 0.5));
  CHECK(s.n == 1);
  CHECK(s.x_prev == vec(0, 0.5));
  CHECK(s.v == vec(0, 0));
  CHECK(s.z == vec(0, 0.5));
}

TEST_CASE("one step by hand") {
  const auto cfg = config(Method::Shb, 0.5);
  const VectorXd g = vec(0, 1);

  auto p = init(cfg, vec(0, 1));
  step_primal_shb(p, g, 0.1, 0.5);
  CHECK(p.x.isApprox(vec(0, 0.9), 1e-15));
  CHECK(p.v.isApprox(vec(0, -0.1), 1e-15));
  CHECK(p.n == 2);

  auto t = init(cfg, vec(0, 1));
  step_transformed_shb(t, g, 0.1, 0.5);
  CHECK(t.v.isApprox(vec(0, -0.1), 1e-15));
  CHECK(t.z.isApprox(vec(0, 0.8), 1e-15));
  CHECK(t.x.isApprox(vec(0, 0.9), 1e-15));

  auto s = init(config(Method::Snag, 0.5), vec(0, 1));
  step_snag(s, g, 0.1, 0.5);
  CHECK(s.v.isApprox(vec(0, -0.05), 1e-15));
  CHECK(s.z.isApprox(vec(0, 0.8), 1e-15));
  CHECK(s.x.isApprox(vec(0, 0.75), 1e-15));

  auto d = init(config(Method::Sgd, 0), vec(0, 1));
  step_sgd(d, g, 0.1);
  CHECK(d.x.isApprox(vec(0, 0.9), 1e-15));

  const auto f = double_well_2d<double>();
  auto w = init(config(Method::Sgd, 0), vec(2, 0));
  step_sgd(w, f.gradient(w.x), 0.1);
  CHECK(w.x.isApprox(vec(1.4, 0), 1e-15));
}

TEST_CASE("zero gradient and zero velocity is a fixed point") {
  for (Method m : {Method::Sgd, Method::Shb, Method::Snag}) {
    const auto cfg = config(m, 0.5);
    auto s = init(cfg, vec(0.3, -2));
    for (int k = 0; k < 5; ++k) step(cfg, s, VectorXd::Zero(2), 0.1);
    CHECK(s.x == vec(0.3, -2));
  }
}

TEST_CASE("noiseless velocity decays geometrically") {
  const double beta = 0.7;
  for (Method m : {Method::Shb, Method::Snag}) {
    auto s = init(config(m, beta), vec(0, 1));
    step(config(m, beta), s, vec(0, 1), 0.1);
    const double v1 = s.v.norm();
    for (int n = 2; n <= 30; ++n) {
      step(config(m, beta), s, VectorXd::Zero(2), 0.1);
      CHECK(s.v.norm() == doctest::Approx(std::pow(beta, n - 1) * v1).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta = 0 reduces momentum methods to SGD bit for bit") {
  const auto f = double_well_2d<double>();
  const auto o = NoiseOracle<double>::sphere(f, 0.5);
  const auto sched = StepSchedule<double>::validate(0.5, 0.7, 0);
  const auto sgd = MethodConfig<double>::make(Method::Sgd, 0, sched);
  auto a = init(sgd, vec(0.2, 0.5));
  auto b = a, c = a, e = a;
  RandomStream rng(9, 9);
  for (int n = 1; n <= 2000; ++n) {
    const VectorXd g = o.sample_gradient(a.x, rng);
    const double alpha = sched.step(n);
    step_sgd(a, g, alpha);
    step_primal_shb(b, g, alpha, 0.0);
    step_transformed_shb(c, g, alpha, 0.0);
    step_snag(e, g, alpha, 0.0);
    REQUIRE(b.x == a.x);
    REQUIRE(c.x == a.x);
    REQUIRE(e.x == a.x);
    REQUIRE(e.v == VectorXd::Zero(2));
  }
}

TEST_CASE("primal and transformed SHB agree and the charts stay consistent") {
  const auto f = double_well_2d<double>();
  const auto o = NoiseOracle<double>::sphere(f, 0.5);
  const auto sched = StepSchedule<double>::validate(0.5, 0.7, 0);
  for (double beta : {0.5, 0.9}) {
    const auto cfg = MethodConfig<double>::make(Method::Shb, beta, sched);
    auto p = init(cfg, vec(0, 0.5));
    auto t = p;
    RandomStream rng(4, 2);
    double worst = 0, chart = 0;
    for (int n = 1; n <= 10000; ++n) {
      const VectorXd g = o.sample_gradient(p.x, rng);
      step_primal_shb(p, g, sched.step(n), beta);
      step_transformed_shb(t, g, sched.step(n), beta);
      worst = std::max(worst, (p.x - t.x).norm() / std::max(1.0, p.x.norm()));
      chart = std::max({chart, chart_inconsistency(p, Method::Shb, beta),
                        chart_inconsistency(t, Method::Shb, beta)});
    }
    CHECK(worst < 1e-9);
    CHECK(chart < 1e-12);
  }
}

TEST_CASE("SNAG keeps the transform identity") {
  const auto o = NoiseOracle<double>::sphere(double_well_2d<double>(), 0.5);
  const auto sched = StepSchedule<double>::validate(0.5, 0.7, 0);
  const auto cfg = MethodConfig<double>::make(Method::Snag, 0.5, sched);
  auto s = init(cfg, vec(0, 0.5));
  RandomStream rng(4, 3);
  double chart = 0;
  for (int n = 1; n <= 10000; ++n) {
    step(cfg, s, o.sample_gradient(s.x, rng), sched.step(n));
    chart = std::max(chart, chart_inconsistency(s, Method::Snag, 0.5));
  }
  CHECK(chart < 1e-12);
}

TEST_CASE("invalid momentum and non-finite iterates") {
  const auto sched = StepSchedule<double>::validate(0.5, 0.7, 0);
  CHECK_THROWS_AS(MethodConfig<double>::make(Method::Shb, 1.0, sched), Error);
  CHECK_THROWS_AS(MethodConfig<double>::make(Method::Snag, -0.1, sched), Error);
  CHECK(MethodConfig<double>::make(Method::Sgd, 0.9, sched).beta == 0.0);

  auto s = init(config(Method::Shb, 0.5), vec(0, 1));
  try {
    step_primal_shb(s, vec(std::numeric_limits<double>::infinity(), 0), 0.1, 0.5);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  CHECK(method_from_string("snag") == Method::Snag);
  CHECK_THROWS_AS(method_from_string("adam"), Error);
}

TEST_CASE("float instantiation") {
  const auto cfg = MethodConfig<float>::make(Method::Shb, 0.5f, StepSchedule<float>::validate(0.1f, 0.7f, 0));
  auto s = init(cfg, Eigen::VectorXf::Ones(2));
  step(cfg, s, Eigen::VectorXf::Ones(2), 0.1f);
  CHECK(s.x[0] == doctest::Approx(0.9f));
}

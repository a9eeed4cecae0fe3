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

#include <cmath>
#include <cstdint>
#include <string>

#include "saddlelab/error.hpp"

namespace saddlelab {

/// Power-law step sizes alpha_n = a * (n + n0)^(-p) with 1/2 < p <= 1.
///
/// This window is exactly where sum(alpha_n) diverges while sum(alpha_n^2)
/// converges. Construction is the only place the window is checked; a
/// StepSchedule that exists is valid.
template <typename Scalar = double>
class StepSchedule {
 public:
  static StepSchedule validate(Scalar scale, Scalar exponent, std::int64_t offset = 0) {
    if (!(scale > Scalar(0))) {
      throw Error(ErrorCode::NonPositiveScale,
                  "schedule scale a must be > 0, got " + std::to_string(double(scale)));
    }
    if (!(exponent > Scalar(0.5))) {
      throw Error(ErrorCode::DivergentSquareSum,
                  "schedule exponent p must be > 0.5 (sum of squared steps diverges), got " +
                      std::to_string(double(exponent)));
    }
    if (exponent > Scalar(1)) {
      throw Error(ErrorCode::SummableSteps,
                  "schedule exponent p must be <= 1 (steps would be summable), got " +
                      std::to_string(double(exponent)));
    }
    if (offset < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "schedule offset n0 must be >= 0, got " + std::to_string(offset));
    }
    return StepSchedule(scale, exponent, offset);
  }

  /// alpha_n for n >= 1.
  Scalar step(std::int64_t n) const {
    return scale_ * std::pow(static_cast<Scalar>(n + offset_), -exponent_);
  }

  Scalar scale() const { return scale_; }
  Scalar exponent() const { return exponent_; }
  std::int64_t offset() const { return offset_; }

  /// sum_{n <= count} alpha_n^2, summed in index order.
  Scalar square_sum(std::int64_t count) const {
    Scalar total = 0;
    for (std::int64_t n = 1; n <= count; ++n) {
      const Scalar s = step(n);
      total += s * s;
    }
    return total;
  }

  Scalar partial_sum(std::int64_t count) const {
    Scalar total = 0;
    for (std::int64_t n = 1; n <= count; ++n) total += step(n);
    return total;
  }

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  StepSchedule(Scalar scale, Scalar exponent, std::int64_t offset)
      : scale_(scale), exponent_(exponent), offset_(offset) {}

  Scalar scale_;
  Scalar exponent_;
  std::int64_t offset_;
};

}  // namespace saddlelab

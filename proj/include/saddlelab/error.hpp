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

#include <stdexcept>
#include <string>
#include <string_view>

namespace saddlelab {

enum class ErrorCode {
  DivergentSquareSum,
  SummableSteps,
  NonPositiveScale,
  InvalidArgument,
  NonSymmetric,
  NotCritical,
  UnboundedBelow,
  NonFinite,
  InsufficientData,
  UnsupportedOracle,
  UnknownKey,
  TypeMismatch,
  MissingMandatory,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivergentSquareSum: return "DivergentSquareSum";
    case ErrorCode::SummableSteps: return "SummableSteps";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::UnboundedBelow: return "UnboundedBelow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UnsupportedOracle: return "UnsupportedOracle";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MissingMandatory: return "MissingMandatory";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace saddlelab

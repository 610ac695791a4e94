// Copyright 2026 The ofd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

namespace ofd {

enum class ErrorCode {
  ParseError,
  DimensionMismatch,
  NegativeValue,
  InvalidDistribution,
  InvalidOrder,
  ItemAlreadyAllocated,
  BudgetExceeded,
  WrongArity,
  WrongArrivalModel,
  WrongMechanism,
  InconsistentPrefix,
  NoPositiveBranch,
  SideMismatch,
  NotThreeRegular,
  NotSubdivisionShaped,
  BadR,
  EmptyGraph,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::ItemAlreadyAllocated: return "ItemAlreadyAllocated";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::WrongArrivalModel: return "WrongArrivalModel";
    case ErrorCode::WrongMechanism: return "WrongMechanism";
    case ErrorCode::InconsistentPrefix: return "InconsistentPrefix";
    case ErrorCode::NoPositiveBranch: return "NoPositiveBranch";
    case ErrorCode::SideMismatch: return "SideMismatch";
    case ErrorCode::NotThreeRegular: return "NotThreeRegular";
    case ErrorCode::NotSubdivisionShaped: return "NotSubdivisionShaped";
    case ErrorCode::BadR: return "BadR";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ofd

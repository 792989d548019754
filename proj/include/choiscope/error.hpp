// Copyright 2026 The choiscope Authors
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

#ifndef CHOISCOPE_ERROR_HPP_
#define CHOISCOPE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace choiscope {

enum class ErrorKind {
  kNotHermitian,
  kNonFinite,
  kNotPsd,
  kShapeMismatch,
  kDimensionMismatch,
  kNonSquareSubsystems,
  kZeroMatrix,
  kNotCompletelyPositive,
  kNotAState,
  kCandidateOutsideRange,
  kNonConvergence,
  kNotOrthonormal,
  kInvalidArgument,
  kParseError,
};

std::string_view to_string(ErrorKind kind);

// Base exception for every failure raised by the library. The kind is the
// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a map that must be completely positive has a Choi matrix with
// an eigenvalue below -atol. Carries that eigenvalue.
class NotCompletelyPositiveError : public Error {
 public:
  NotCompletelyPositiveError(double min_eigenvalue, const std::string& message)
      : Error(ErrorKind::kNotCompletelyPositive, message),
        min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace choiscope

#endif  // CHOISCOPE_ERROR_HPP_

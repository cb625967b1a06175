// Copyright 2026 The consmatch Authors.
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

#ifndef CONSMATCH_ERROR_HPP_
#define CONSMATCH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace consmatch {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kInfeasibleK,
  kNonFinite,
  kInvalidValue,
  kInfeasible,
  kInstanceTooLarge,
  kDegenerate,
  kKTooSmall,
  kIndexMismatch,
  kParse,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C layer can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace consmatch

#endif  // CONSMATCH_ERROR_HPP_

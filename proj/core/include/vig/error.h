// Copyright 2026 The VIG Authors. All Rights Reserved.
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

#ifndef VIG_ERROR_H_
#define VIG_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vig {

enum class ErrorCode {
  kShape,     // tensor or frame dimensions disagree
  kConfig,    // invalid configuration value
  kIo,        // file missing, unreadable, or wrong size
  kParse,     // malformed manifest / config / checkpoint text
  kRange,     // argument outside its domain
  kNumeric,   // non-finite values during optimization
  kEmpty,     // empty sequence, corpus or loss support
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) Fail(code, what);
}

}  // namespace vig

#endif  // VIG_ERROR_H_

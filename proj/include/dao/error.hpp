// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dao {

enum class Errc {
  kInvalidArgument,
  kOverflow,
  kNotFound,
  kCorruption,
  kDuplicate,
  kParse,
  kStructural,
  kUnsatisfied,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid-argument";
    case Errc::kOverflow: return "overflow";
    case Errc::kNotFound: return "not-found";
    case Errc::kCorruption: return "corruption";
    case Errc::kDuplicate: return "duplicate";
    case Errc::kParse: return "parse";
    case Errc::kStructural: return "structural";
    case Errc::kUnsatisfied: return "unsatisfied";
  }
  return "unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dao

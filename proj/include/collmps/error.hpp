// Copyright 2026 The collmps Authors
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

#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace collmps {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit together (bond, mode or system dimension).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An input violates a documented precondition (non-Hermitian generator,
// unnormalized state, index out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A size guard or a numerical convergence check failed.
class GuardError : public Error {
 public:
  using Error::Error;
};

// Transfer matrix has a second eigenvalue on the unit circle (GHZ-like
// environments); the stroboscopic construction is undefined there.
class InfiniteCorrelationLength : public Error {
 public:
  using Error::Error;
};

// Configuration document is malformed; `field` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline bool& warnings_enabled() {
  static bool enabled = true;
  return enabled;
}

inline void warn(const std::string& msg) {
  if (warnings_enabled()) std::cerr << "collmps warning: " << msg << '\n';
}

}  // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_enabled() = on; }

}  // namespace collmps

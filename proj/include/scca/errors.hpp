// Copyright 2026 The scca Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace scca {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up (row counts, ranks larger than dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used: non-finite values, zero-variance columns.
class DataError : public Error {
 public:
  using Error::Error;
};

// Arguments outside their documented domain.
class InputError : public Error {
 public:
  using Error::Error;
};

// A precondition of a theoretical result is violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Linear algebra broke down: singular whitening, non-PSD input.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An iterate collapsed (zero norm, rank loss, overflow). Reinitialize.
class DegenerateIterateError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace scca

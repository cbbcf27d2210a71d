// Copyright 2026 The qdmesh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdm {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Input violates a structural invariant (index out of range, repeated
/// vertex in a face, token stream layout).
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Geometry is degenerate for the requested operation (zero-area face,
/// zero-extent mesh, collinear points).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Scalar argument outside its valid domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Decoded token does not belong to the axis its position implies.
class AxisAmbiguityError : public StructureError {
 public:
  using StructureError::StructureError;
};

/// A metric is undefined on the given input (e.g. OEP of a mesh with no
/// quads).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdm

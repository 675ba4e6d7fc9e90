// Copyright 2026 The qtn Authors
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

namespace qtn {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or axis lengths do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the documented domain of an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition (unitarity, G^2 = I, CPTP, ...) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A dense representation would exceed the configured size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// The requested derivative cannot be computed for this circuit.
class DifferentiationError : public Error {
 public:
  using Error::Error;
};

/// A serialized document does not follow the expected schema. `path` points
/// at the offending field, e.g. "ops[3].name".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A time budget ran out.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtn

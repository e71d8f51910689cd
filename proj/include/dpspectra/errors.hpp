//
// Copyright 2026 The dpspectra Authors
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
//

#ifndef DPSPECTRA_ERRORS_HPP_
#define DPSPECTRA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpspectra {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched or out-of-range matrix dimensions, ranks and indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid privacy budget, experiment configuration or CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed to converge.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

// Malformed or unreadable data and report files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpspectra

#endif  // DPSPECTRA_ERRORS_HPP_

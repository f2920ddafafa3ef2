// Copyright 2026 The Authors.
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

#ifndef IONADDR_ERRORS_HPP
#define IONADDR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ionaddr {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition on a physical quantity.
class DomainError : public Error {
 public:
  using Error::Error;
};

// C*q + D vanished during a complex-beam-parameter transform.
class SingularPropagationError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Requested grid cannot resolve the pupil or the focal spot.
class SamplingError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A requested target (visibility floor, Lagrange budget, ...) cannot be met.
class InfeasibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed scenario, sidecar or input table.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ionaddr

#endif  // IONADDR_ERRORS_HPP

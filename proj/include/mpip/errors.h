// Copyright 2026 The MPIP Authors
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

#ifndef MPIP_ERRORS_H_
#define MPIP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mpip {

// Base class for all library errors. The subclasses map onto distinct CLI
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (phase outside [0, 1],
// unknown channel, empty signal, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed dataset, manifest or model document.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Singular or non-finite linear algebra.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpip

#endif  // MPIP_ERRORS_H_

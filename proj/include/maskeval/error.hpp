// Copyright 2026 The maskeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace maskeval {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input record or argument violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A metric whose denominator is zero.
class UndefinedValueError : public Error {
 public:
  using Error::Error;
};

/// Token spans or code references that do not line up with the source text.
class SpanError : public Error {
 public:
  using Error::Error;
};

/// Endpoint unreachable or retries exhausted. Trials that hit this are
/// recorded as missing; the campaign keeps going.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Credentials rejected (HTTP 401/403). Aborts the whole run.
class AuthError : public Error {
 public:
  using Error::Error;
};

}  // namespace maskeval

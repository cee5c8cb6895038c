// Copyright 2026 The FEDF Authors
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

#include <stdexcept>
#include <string>

namespace fedf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched vector/matrix lengths between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced during training; message names the step.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Invalid 2-bit code or padding in a packed ternary buffer.
class CorruptEncodingError : public Error {
 public:
  using Error::Error;
};

// Message sequence violated the protocol state machine.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Peer did not answer within the configured deadline.
class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Bad user input: config fields, CSV content, CLI flags.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unreadable or syntactically broken input file.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace fedf

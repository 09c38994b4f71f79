// Copyright 2026 The ctrlmut Authors.
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

namespace ctrlmut {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A model response did not contain a usable fenced code block.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

/// Network or HTTP failure talking to a chat-completions endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

class AuthError : public TransportError {
 public:
  using TransportError::TransportError;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class ReplayExhausted : public Error {
 public:
  using Error::Error;
};

/// A replayed request differs from the one recorded in the transcript.
class ReplayMismatch : public Error {
 public:
  using Error::Error;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// The initial code instance could not be produced; the run cannot start.
class GenerationAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace ctrlmut

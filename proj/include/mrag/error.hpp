// Copyright 2026 The mrag Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrag {

// Base of every error the library raises. The CLI maps subclasses onto exit
// statuses, so keep the hierarchy shallow.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: a malformed record, unknown language code, missing field.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Invalid or inconsistent configuration detected before any side effect.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Persisted artifact failed its checksum or is structurally damaged.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class DimsMismatchError : public Error {
 public:
  DimsMismatchError(std::size_t expected, std::size_t got)
      : Error("embedding dims mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const { return expected_; }
  std::size_t got() const { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

// Failure talking to an external model service. Retryable failures are
// retried by the client policy; whatever escapes has exhausted its attempts.
class ServiceError : public Error {
 public:
  ServiceError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class ContextLengthError : public ServiceError {
 public:
  ContextLengthError(const std::string& what, std::size_t prompt_chars)
      : ServiceError(what + " (prompt size " + std::to_string(prompt_chars) + " chars)", false),
        prompt_chars_(prompt_chars) {}

  std::size_t prompt_chars() const { return prompt_chars_; }

 private:
  std::size_t prompt_chars_;
};

}  // namespace mrag

// Copyright 2026 The Midsmith Authors
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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace midsmith {

enum class ErrorKind {
  // dataset / records
  MalformedLine,
  DuplicateId,
  InvariantViolation,
  VocabularyMiss,
  Io,
  // protocol
  EmptyOutput,
  NonAlternatingHistory,
  UnrecognizedVerdict,
  MissingCorrection,
  MissingRule,
  // backends
  BackendUnavailable,
  Timeout,
  MalformedResponse,
  ScriptMiss,
  SafetyRejection,
  ImageNotFound,
  // engine
  ParseFailure,
  Busy,
  // forge / eval
  InsufficientCorpus,
  PoolTooSmall,
  EmptyLogs,
  // config / usage
  InvalidConfig,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;
/// Inverse of to_string; nullopt for unknown names.
std::optional<ErrorKind> parse_error_kind(std::string_view name) noexcept;

/// Every failure surfaced by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace midsmith

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
#include <string>
#include <string_view>

#include <json.hpp>

namespace midsmith {

/// A judge's decision on one assistant output.
///
/// Grammar accepted by parse_teacher_verdict (after trimming):
///
///     ###Correct [anything]
///     ###Wrong### <text mentioning "rule N"> <explanation>
///         Correct Solution: <corrected assistant output>
///
/// "rule N" is matched case-insensitively; the first occurrence wins. The
/// solution header may also be spelled "Correct solution:".
struct CorrectionVerdict {
  enum class Kind { Correct, Wrong };

  Kind kind = Kind::Correct;
  std::optional<int> violated_rule;
  std::optional<std::string> explanation;
  std::optional<std::string> corrected_output;

  static CorrectionVerdict correct() { return {}; }
  bool operator==(const CorrectionVerdict&) const = default;
};

/// Throws Error(UnrecognizedVerdict) when neither marker leads,
/// Error(MissingRule) when a Wrong verdict names no rule 1-3 and
/// Error(MissingCorrection) when it has no solution header or an empty solution.
CorrectionVerdict parse_teacher_verdict(std::string_view raw);

/// Inverse of parse_teacher_verdict for well-formed verdicts.
std::string render_verdict(const CorrectionVerdict& verdict);

nlohmann::ordered_json to_json(const CorrectionVerdict& v);
CorrectionVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace midsmith

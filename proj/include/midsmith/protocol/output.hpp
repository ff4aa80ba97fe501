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

#include "midsmith/core/types.hpp"

namespace midsmith {

/// A chat-model reply split into its output modality and payload. For Image
/// the text is the drawing prompt with the leading <draw> removed.
struct ParsedAssistantOutput {
  Modality modality = Modality::Text;
  std::string text;
  /// Set when the reply mentions <draw> somewhere other than the start.
  std::optional<std::string> warning;

  bool operator==(const ParsedAssistantOutput& o) const {
    return modality == o.modality && text == o.text;
  }
};

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

/// Start-anchored <draw> detection after trimming. Throws Error(EmptyOutput)
/// on blank input, or on a bare "<draw>" with no prompt behind it.
ParsedAssistantOutput parse_output(std::string_view raw);

/// Non-empty, already trimmed, and not itself starting with <draw>. These are
/// Valid values always survive render -> parse unchanged.
bool is_valid(const ParsedAssistantOutput& parsed) noexcept;

std::string render_output(const ParsedAssistantOutput& parsed);

}  // namespace midsmith

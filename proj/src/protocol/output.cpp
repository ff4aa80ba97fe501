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

#include "midsmith/protocol/output.hpp"

#include "midsmith/core/error.hpp"
#include "midsmith/protocol/templates.hpp"

namespace midsmith {

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

ParsedAssistantOutput parse_output(std::string_view raw) {
  const auto body = trim(raw);
  if (body.empty()) throw Error(ErrorKind::EmptyOutput, "assistant output is blank");

  ParsedAssistantOutput out;
  if (body.starts_with(kDrawToken)) {
    out.modality = Modality::Image;
    out.text = std::string(trim(body.substr(kDrawToken.size())));
    if (out.text.empty()) throw Error(ErrorKind::EmptyOutput, "<draw> with no drawing prompt");
    return out;
  }
  out.modality = Modality::Text;
  out.text = std::string(body);
  if (body.find(kDrawToken) != std::string_view::npos) {
    out.warning = "<draw> appears after the start of the output; classified as text";
  }
  return out;
}

bool is_valid(const ParsedAssistantOutput& parsed) noexcept {
  return !parsed.text.empty() && trim(parsed.text).size() == parsed.text.size() &&
         !parsed.text.starts_with(kDrawToken);
}

std::string render_output(const ParsedAssistantOutput& parsed) {
  if (parsed.modality == Modality::Image) return std::string(kDrawToken) + parsed.text;
  return parsed.text;
}

}  // namespace midsmith

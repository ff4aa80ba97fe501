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

#include <filesystem>
#include <string>
#include <string_view>

namespace midsmith {

/// The modality switch token the chat model emits ahead of a drawing prompt.
inline constexpr std::string_view kDrawToken = "<draw>";
inline constexpr std::string_view kCorrectMarker = "###Correct";
inline constexpr std::string_view kWrongMarker = "###Wrong###";

/// Prompt texts used when talking to the chat, student and teacher models.
struct PromptTemplates {
  /// System prompt for both training-format data and inference.
  std::string training_prompt;
  /// Self-correction prompt used for the second inference step.
  std::string correction_prompt;
  /// Re-captioning prompt.
  std::string caption_prompt;
  /// Teacher instruction with the three judging rules and worked examples.
  std::string teacher_fewshot_prompt;
  /// Asks a judge model for a one-word IMAGE / TEXT intent verdict.
  std::string intent_judge_prompt;

  /// English defaults.
  static PromptTemplates defaults();

  /// Defaults overlaid with a JSON object {template name: text}. Unknown
  /// names are rejected.
  static PromptTemplates load_overrides(const std::filesystem::path& path);

  /// Throws Error(InvalidConfig) if a required marker is missing.
  void validate() const;

  bool operator==(const PromptTemplates&) const = default;
};

}  // namespace midsmith

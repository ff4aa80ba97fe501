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

#include "midsmith/core/types.hpp"

#include <algorithm>

#include "midsmith/core/error.hpp"

namespace midsmith {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::VocabularyMiss: return "VocabularyMiss";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::EmptyOutput: return "EmptyOutput";
    case ErrorKind::NonAlternatingHistory: return "NonAlternatingHistory";
    case ErrorKind::UnrecognizedVerdict: return "UnrecognizedVerdict";
    case ErrorKind::MissingCorrection: return "MissingCorrection";
    case ErrorKind::MissingRule: return "MissingRule";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::ScriptMiss: return "ScriptMiss";
    case ErrorKind::SafetyRejection: return "SafetyRejection";
    case ErrorKind::ImageNotFound: return "ImageNotFound";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::Busy: return "Busy";
    case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorKind::PoolTooSmall: return "PoolTooSmall";
    case ErrorKind::EmptyLogs: return "EmptyLogs";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::optional<ErrorKind> parse_error_kind(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(ErrorKind::InvalidArgument); ++i) {
    const auto kind = static_cast<ErrorKind>(i);
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Modality m) noexcept {
  return m == Modality::Image ? "image" : "text";
}

Modality parse_modality(std::string_view s) {
  if (s == "text") return Modality::Text;
  if (s == "image") return Modality::Image;
  throw Error(ErrorKind::InvalidArgument, "unknown modality '" + std::string(s) + "'");
}

std::string_view to_string(ModalityScenario s) noexcept {
  static constexpr std::array<std::string_view, 4> codes = {"T->T", "T->I", "IT->T", "IT->I"};
  return codes[static_cast<std::size_t>(s.index())];
}

ModalityScenario parse_scenario(std::string_view code) {
  for (auto s : kAllScenarios) {
    if (to_string(s) == code) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scenario code '" + std::string(code) + "'");
}

std::string_view to_string(Language l) noexcept { return l == Language::Cn ? "cn" : "en"; }

Language parse_language(std::string_view s) {
  if (s == "en") return Language::En;
  if (s == "cn") return Language::Cn;
  throw Error(ErrorKind::InvalidArgument, "unknown language '" + std::string(s) + "'");
}

ModalityScenario scenario_of(const TurnSpec& turn) noexcept {
  return {turn.user.image_ref.has_value(), turn.expected_modality};
}

std::vector<ModalityScenario> composition(const ConversationRecord& record) {
  std::vector<ModalityScenario> out;
  out.reserve(record.turns.size());
  for (const auto& t : record.turns) out.push_back(scenario_of(t));
  return out;
}

bool is_content_address(std::string_view s) noexcept {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

namespace {

[[noreturn]] void violation(const std::string& id, const std::string& field) {
  throw Error(ErrorKind::InvariantViolation, "record '" + id + "': " + field);
}

}  // namespace

void validate(const ConversationRecord& record) {
  if (record.id.empty()) violation(record.id, "id is empty");
  if (record.topic.empty()) violation(record.id, "topic is empty");
  if (record.edit_type && record.edit_type->empty()) violation(record.id, "edit_type is empty");
  if (record.turns.empty()) violation(record.id, "turns is empty");
  for (std::size_t i = 0; i < record.turns.size(); ++i) {
    const auto& turn = record.turns[i];
    const std::string where = "turns[" + std::to_string(i) + "]";
    if (turn.user.text.empty()) violation(record.id, where + ".user.text is empty");
    if (turn.user.image_ref && !is_content_address(*turn.user.image_ref)) {
      violation(record.id, where + ".user.image_ref is not a content address");
    }
    if (!turn.vqa_items.empty() && turn.expected_modality != Modality::Image) {
      violation(record.id, where + ".vqa_items present on a text turn");
    }
    for (std::size_t j = 0; j < turn.vqa_items.size(); ++j) {
      const auto& item = turn.vqa_items[j];
      const std::string iw = where + ".vqa_items[" + std::to_string(j) + "]";
      const std::string_view q = item.question;
      if (!q.ends_with("?") && !q.ends_with("\xEF\xBC\x9F")) {  // ASCII or fullwidth mark
        violation(record.id, iw + ".question must end with '?'");
      }
      if (item.expected_answer.empty()) violation(record.id, iw + ".expected_answer is empty");
    }
  }
}

}  // namespace midsmith

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

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace midsmith {

enum class Modality { Text, Image };

std::string_view to_string(Modality m) noexcept;
/// Accepts "text" / "image".
Modality parse_modality(std::string_view s);

/// One of the four input/output combinations a turn can take.
struct ModalityScenario {
  bool input_has_image = false;
  Modality output = Modality::Text;

  /// Position in the fixed order T->T, T->I, IT->T, IT->I.
  constexpr int index() const noexcept {
    return (input_has_image ? 2 : 0) + (output == Modality::Image ? 1 : 0);
  }
  static constexpr ModalityScenario from_index(int i) noexcept {
    return {i >= 2, (i % 2) == 1 ? Modality::Image : Modality::Text};
  }

  friend constexpr bool operator==(ModalityScenario a, ModalityScenario b) noexcept {
    return a.index() == b.index();
  }
  friend constexpr auto operator<=>(ModalityScenario a, ModalityScenario b) noexcept {
    return a.index() <=> b.index();
  }
};

inline constexpr std::array<ModalityScenario, 4> kAllScenarios = {
    ModalityScenario::from_index(0), ModalityScenario::from_index(1),
    ModalityScenario::from_index(2), ModalityScenario::from_index(3)};

/// Canonical codes: "T->T", "T->I", "IT->T", "IT->I".
std::string_view to_string(ModalityScenario s) noexcept;
ModalityScenario parse_scenario(std::string_view code);

enum class Language { En, Cn };

std::string_view to_string(Language l) noexcept;
Language parse_language(std::string_view s);

struct UserTurnInput {
  std::string text;
  std::optional<std::string> image_ref;

  bool operator==(const UserTurnInput&) const = default;
};

struct VqaItem {
  std::string question;
  std::string expected_answer;

  bool operator==(const VqaItem&) const = default;
};

struct TurnSpec {
  UserTurnInput user;
  Modality expected_modality = Modality::Text;
  std::optional<std::string> reference_response;
  std::vector<VqaItem> vqa_items;

  bool operator==(const TurnSpec&) const = default;
};

struct ConversationRecord {
  std::string id;
  Language language = Language::En;
  std::string topic;
  std::optional<std::string> edit_type;
  std::vector<TurnSpec> turns;

  bool operator==(const ConversationRecord&) const = default;
};

ModalityScenario scenario_of(const TurnSpec& turn) noexcept;
std::vector<ModalityScenario> composition(const ConversationRecord& record);

/// True for a 64-character lowercase hex string.
bool is_content_address(std::string_view s) noexcept;

/// Throws Error(InvariantViolation) naming the offending field.
void validate(const ConversationRecord& record);

}  // namespace midsmith

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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "midsmith/core/types.hpp"

namespace midsmith {

/// Outcome of one benchmark turn. `correct` is always
/// predicted_modality == expected_modality.
struct TurnLog {
  std::string conversation_id;
  int round = 1;  // 1-based
  ModalityScenario scenario;
  Modality predicted_modality = Modality::Text;
  Modality expected_modality = Modality::Text;
  bool correct = false;
  std::optional<std::string> image_ref;
  std::optional<std::string> drawing_prompt;

  bool operator==(const TurnLog&) const = default;
};

TurnLog make_turn_log(std::string conversation_id, int round, ModalityScenario scenario,
                      Modality predicted, std::optional<std::string> image_ref = std::nullopt,
                      std::optional<std::string> drawing_prompt = std::nullopt);

struct ConversationFailure {
  std::string conversation_id;
  std::string error;

  bool operator==(const ConversationFailure&) const = default;
};

/// Logs of every conversation that completed, plus the ones that did not.
/// Failed conversations contribute no logs.
struct InferenceRun {
  std::vector<TurnLog> logs;
  std::vector<ConversationFailure> failures;

  bool operator==(const InferenceRun&) const = default;
};

nlohmann::ordered_json to_json(const TurnLog& log);
TurnLog turn_log_from_json(const nlohmann::json& j);

// JSONL, one object per line. Completed turns carry "status": "ok"; each
// failed conversation is one {"status": "failed", "conversation_id", "error"}
// line.
void save_inference_run(const InferenceRun& run, const std::filesystem::path& path);
InferenceRun load_inference_run(const std::filesystem::path& path);

}  // namespace midsmith

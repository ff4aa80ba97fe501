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
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "midsmith/core/types.hpp"

namespace midsmith {

/// Allowed topic and edit-type names. Loaded from a JSON object
/// {"topics": [...], "edit_types": [...]}.
struct Vocabulary {
  std::set<std::string> topics;
  std::set<std::string> edit_types;

  static Vocabulary load(const std::filesystem::path& path);
  /// Throws Error(VocabularyMiss).
  void check(const std::string& topic, const std::optional<std::string>& edit_type) const;
};

// Record <-> JSON. Output key order: id, language, topic, edit_type, turns;
// per turn: user{text, image_ref}, expected_modality, reference_response,
// vqa_items[{question, expected_answer}]. Absent optionals are omitted.
nlohmann::ordered_json to_json(const UserTurnInput& u);
nlohmann::ordered_json to_json(const ConversationRecord& r);
UserTurnInput user_turn_from_json(const nlohmann::json& j);
ConversationRecord record_from_json(const nlohmann::json& j);

/// One record per line. Rejects malformed lines, duplicate ids, and records
/// breaking a type invariant; also checks vocabulary membership when given.
std::vector<ConversationRecord> load_dataset(const std::filesystem::path& path,
                                             const Vocabulary* vocab = nullptr);

void save_dataset(const std::vector<ConversationRecord>& records,
                  const std::filesystem::path& path);

/// Serialized form of one record, without the trailing newline.
std::string to_jsonl_line(const ConversationRecord& r);

// Small file helpers shared by every JSONL writer in the project.
std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace midsmith

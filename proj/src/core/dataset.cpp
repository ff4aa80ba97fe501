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

#include "midsmith/core/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "vocabulary " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("topics") || !j["topics"].is_array()) {
    throw Error(ErrorKind::InvalidConfig,
                "vocabulary " + path.string() + ": expected {\"topics\": [...], ...}");
  }
  Vocabulary v;
  for (const auto& t : j["topics"]) v.topics.insert(t.get<std::string>());
  if (j.contains("edit_types")) {
    for (const auto& t : j["edit_types"]) v.edit_types.insert(t.get<std::string>());
  }
  return v;
}

void Vocabulary::check(const std::string& topic, const std::optional<std::string>& edit_type) const {
  if (!topics.contains(topic)) {
    throw Error(ErrorKind::VocabularyMiss, "topic '" + topic + "' is not in the vocabulary");
  }
  if (edit_type && !edit_types.contains(*edit_type)) {
    throw Error(ErrorKind::VocabularyMiss,
                "edit type '" + *edit_type + "' is not in the vocabulary");
  }
}

ordered_json to_json(const UserTurnInput& u) {
  ordered_json j;
  j["text"] = u.text;
  if (u.image_ref) j["image_ref"] = *u.image_ref;
  return j;
}

ordered_json to_json(const ConversationRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["language"] = std::string(to_string(r.language));
  j["topic"] = r.topic;
  if (r.edit_type) j["edit_type"] = *r.edit_type;
  ordered_json turns = ordered_json::array();
  for (const auto& t : r.turns) {
    ordered_json tj;
    tj["user"] = to_json(t.user);
    tj["expected_modality"] = std::string(to_string(t.expected_modality));
    if (t.reference_response) tj["reference_response"] = *t.reference_response;
    ordered_json items = ordered_json::array();
    for (const auto& item : t.vqa_items) {
      ordered_json ij;
      ij["question"] = item.question;
      ij["expected_answer"] = item.expected_answer;
      items.push_back(std::move(ij));
    }
    tj["vqa_items"] = std::move(items);
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j;
}

namespace {

template <typename J>
std::optional<std::string> optional_string(const J& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).template get<std::string>();
}

}  // namespace

UserTurnInput user_turn_from_json(const json& j) {
  UserTurnInput u;
  u.text = j.at("text").get<std::string>();
  u.image_ref = optional_string(j, "image_ref");
  return u;
}

ConversationRecord record_from_json(const json& j) {
  ConversationRecord r;
  r.id = j.at("id").get<std::string>();
  r.language = parse_language(j.at("language").get<std::string>());
  r.topic = j.at("topic").get<std::string>();
  r.edit_type = optional_string(j, "edit_type");
  for (const auto& tj : j.at("turns")) {
    TurnSpec t;
    t.user = user_turn_from_json(tj.at("user"));
    t.expected_modality = parse_modality(tj.at("expected_modality").get<std::string>());
    t.reference_response = optional_string(tj, "reference_response");
    if (tj.contains("vqa_items")) {
      for (const auto& ij : tj.at("vqa_items")) {
        t.vqa_items.push_back(
            {ij.at("question").get<std::string>(), ij.at("expected_answer").get<std::string>()});
      }
    }
    r.turns.push_back(std::move(t));
  }
  return r;
}

std::string to_jsonl_line(const ConversationRecord& r) { return to_json(r).dump(); }

std::vector<ConversationRecord> load_dataset(const std::filesystem::path& path,
                                             const Vocabulary* vocab) {
  std::vector<ConversationRecord> records;
  std::unordered_set<std::string> ids;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ConversationRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate(r);
    if (vocab) vocab->check(r.topic, r.edit_type);
    if (!ids.insert(r.id).second) throw Error(ErrorKind::DuplicateId, r.id);
    records.push_back(std::move(r));
  }
  return records;
}

void save_dataset(const std::vector<ConversationRecord>& records,
                  const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : records) {
    validate(r);
    out += to_jsonl_line(r);
    out += '\n';
  }
  write_file(path, out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "rename to " + path.string() + ": " + ec.message());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace midsmith

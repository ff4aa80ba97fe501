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
#include <vector>

#include <json.hpp>

namespace midsmith {

enum class Role { User, Assistant };

struct ContentPart {
  enum class Kind { Text, ImageRef, ImageB64 };

  Kind kind = Kind::Text;
  /// Text, a content address, or a base64 payload depending on `kind`.
  std::string value;

  static ContentPart text(std::string s) { return {Kind::Text, std::move(s)}; }
  static ContentPart image_ref(std::string addr) { return {Kind::ImageRef, std::move(addr)}; }
  static ContentPart image_b64(std::string b64) { return {Kind::ImageB64, std::move(b64)}; }

  bool is_image() const noexcept { return kind != Kind::Text; }
  bool operator==(const ContentPart&) const = default;
};

struct ChatMessage {
  Role role = Role::User;
  std::vector<ContentPart> parts;

  /// Concatenation of the text parts.
  std::string text() const;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::optional<std::string> system;
  std::vector<ChatMessage> messages;

  bool operator==(const ChatRequest&) const = default;
};

/// Roles must alternate starting with user and end on a user message.
/// Throws Error(InvalidArgument).
void validate(const ChatRequest& request);

// Wire form:
//   {"system": "...", "messages": [{"role": "user",
//     "parts": [{"kind": "text", "text": "..."},
//               {"kind": "image", "ref": "<address>"},
//               {"kind": "image", "b64": "<payload>"}]}]}
nlohmann::ordered_json to_json(const ChatRequest& request);
ChatRequest chat_request_from_json(const nlohmann::json& j);

/// Compact serialization; byte-stable for equal requests.
std::string serialize(const ChatRequest& request);
/// Content digest used to key scripted responses.
std::string request_digest(const ChatRequest& request);

}  // namespace midsmith

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

#include "midsmith/backends/chat_request.hpp"

#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

std::string ChatMessage::text() const {
  std::string out;
  for (const auto& p : parts) {
    if (p.kind == ContentPart::Kind::Text) out += p.value;
  }
  return out;
}

void validate(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw Error(ErrorKind::InvalidArgument, "chat request has no messages");
  }
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::User : Role::Assistant;
    if (request.messages[i].role != expected) {
      throw Error(ErrorKind::InvalidArgument,
                  "message " + std::to_string(i) + " breaks user/assistant alternation");
    }
    if (request.messages[i].parts.empty()) {
      throw Error(ErrorKind::InvalidArgument, "message " + std::to_string(i) + " has no parts");
    }
  }
  if (request.messages.back().role != Role::User) {
    throw Error(ErrorKind::InvalidArgument, "chat request must end with a user message");
  }
}

ordered_json to_json(const ChatRequest& request) {
  ordered_json j;
  if (request.system) j["system"] = *request.system;
  ordered_json msgs = ordered_json::array();
  for (const auto& m : request.messages) {
    ordered_json mj;
    mj["role"] = m.role == Role::User ? "user" : "assistant";
    ordered_json parts = ordered_json::array();
    for (const auto& p : m.parts) {
      ordered_json pj;
      switch (p.kind) {
        case ContentPart::Kind::Text:
          pj["kind"] = "text";
          pj["text"] = p.value;
          break;
        case ContentPart::Kind::ImageRef:
          pj["kind"] = "image";
          pj["ref"] = p.value;
          break;
        case ContentPart::Kind::ImageB64:
          pj["kind"] = "image";
          pj["b64"] = p.value;
          break;
      }
      parts.push_back(std::move(pj));
    }
    mj["parts"] = std::move(parts);
    msgs.push_back(std::move(mj));
  }
  j["messages"] = std::move(msgs);
  return j;
}

ChatRequest chat_request_from_json(const json& j) {
  ChatRequest r;
  try {
    if (j.contains("system") && !j["system"].is_null()) r.system = j["system"].get<std::string>();
    for (const auto& mj : j.at("messages")) {
      ChatMessage m;
      const auto role = mj.at("role").get<std::string>();
      if (role == "user") {
        m.role = Role::User;
      } else if (role == "assistant") {
        m.role = Role::Assistant;
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown role '" + role + "'");
      }
      for (const auto& pj : mj.at("parts")) {
        const auto kind = pj.at("kind").get<std::string>();
        if (kind == "text") {
          m.parts.push_back(ContentPart::text(pj.at("text").get<std::string>()));
        } else if (kind == "image") {
          const bool has_ref = pj.contains("ref");
          const bool has_b64 = pj.contains("b64");
          if (has_ref == has_b64) {
            throw Error(ErrorKind::InvalidArgument, "image part needs exactly one of ref/b64");
          }
          m.parts.push_back(has_ref ? ContentPart::image_ref(pj["ref"].get<std::string>())
                                    : ContentPart::image_b64(pj["b64"].get<std::string>()));
        } else {
          throw Error(ErrorKind::InvalidArgument, "unknown part kind '" + kind + "'");
        }
      }
      r.messages.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("chat request: ") + e.what());
  }
  return r;
}

std::string serialize(const ChatRequest& request) { return to_json(request).dump(); }

std::string request_digest(const ChatRequest& request) { return sha256_hex(serialize(request)); }

}  // namespace midsmith

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

#include "midsmith/protocol/requests.hpp"

#include <algorithm>
#include <cctype>

#include "midsmith/core/error.hpp"
#include "midsmith/protocol/output.hpp"

namespace midsmith {

namespace {

ChatRequest single_user_message(std::string text) {
  ChatRequest r;
  r.messages.push_back({Role::User, {ContentPart::text(std::move(text))}});
  return r;
}

std::string composite(std::string_view preamble, std::string_view query,
                      std::string_view output) {
  std::string s(preamble);
  s += "\n\nQuestion: ";
  s += query;
  s += "\n\nOriginal Output: ";
  s += output;
  s += "\n\nCorrection:";
  return s;
}

void require_non_empty(std::string_view v, const char* what) {
  if (trim(v).empty()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " is empty");
}

}  // namespace

ChatMessage user_message(const UserTurnInput& user) {
  ChatMessage m{Role::User, {ContentPart::text(user.text)}};
  if (user.image_ref) m.parts.push_back(ContentPart::image_ref(*user.image_ref));
  return m;
}

std::string render_user_turn(const UserTurnInput& user) {
  if (!user.image_ref) return user.text;
  return "<img>" + *user.image_ref + "</img>" + user.text;
}

ChatRequest build_inference_request(const PromptTemplates& templates,
                                    const std::vector<ChatMessage>& history,
                                    const UserTurnInput& user) {
  if (history.size() % 2 != 0) {
    throw Error(ErrorKind::NonAlternatingHistory, "history ends on a user message");
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::User : Role::Assistant;
    if (history[i].role != expected) {
      throw Error(ErrorKind::NonAlternatingHistory,
                  "history message " + std::to_string(i) + " has the wrong role");
    }
  }
  ChatRequest r;
  r.system = templates.training_prompt;
  r.messages = history;
  r.messages.push_back(user_message(user));
  return r;
}

ChatRequest build_correction_request(const PromptTemplates& templates, std::string_view query,
                                     std::string_view output) {
  require_non_empty(query, "query");
  require_non_empty(output, "original output");
  return single_user_message(composite(templates.correction_prompt, query, output));
}

ChatRequest build_teacher_request(const PromptTemplates& templates, std::string_view query,
                                  std::string_view output, std::string_view history) {
  require_non_empty(query, "query");
  require_non_empty(output, "original output");
  std::string preamble = templates.teacher_fewshot_prompt;
  preamble += "\n\nHistory: ";
  preamble += trim(history).empty() ? std::string_view("(empty)") : history;
  return single_user_message(composite(preamble, query, output));
}

ChatRequest build_caption_request(const PromptTemplates& templates, const std::string& image_ref) {
  ChatRequest r;
  r.messages.push_back(
      {Role::User, {ContentPart::text(templates.caption_prompt), ContentPart::image_ref(image_ref)}});
  return r;
}

ChatRequest build_intent_judge_request(const PromptTemplates& templates,
                                       std::string_view history, std::string_view instruction) {
  std::string s = templates.intent_judge_prompt;
  s += "\n\nConversation so far: ";
  s += trim(history).empty() ? std::string_view("(empty)") : history;
  s += "\n\nInstruction: ";
  s += instruction;
  s += "\n\nAnswer:";
  return single_user_message(std::move(s));
}

Modality parse_intent_verdict(std::string_view raw) {
  std::string word;
  for (char c : trim(raw)) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    } else if (!word.empty()) {
      break;
    }
  }
  if (word == "IMAGE") return Modality::Image;
  if (word == "TEXT") return Modality::Text;
  throw Error(ErrorKind::MalformedResponse, "intent judge answered '" + std::string(raw) + "'");
}

}  // namespace midsmith

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

#include <string>
#include <string_view>
#include <vector>

#include "midsmith/backends/chat_request.hpp"
#include "midsmith/core/types.hpp"
#include "midsmith/protocol/templates.hpp"

namespace midsmith {

// Composite prompts (correction, teacher) are a single user message made of
// labeled sections separated by blank lines:
//
//     <template>
//
//     History: <history or "(empty)">      (teacher only)
//
//     Question: <query>
//
//     Original Output: <previous output>
//
//     Correction:

/// User message for one turn: a text part, then an image part if attached.
ChatMessage user_message(const UserTurnInput& user);

/// Text rendering of a user turn for composite prompts; an attached image is
/// written as "<img>ADDRESS</img>" ahead of the text.
std::string render_user_turn(const UserTurnInput& user);

/// System prompt, then `history` verbatim, then the new user turn.
/// `history` must alternate user/assistant starting with user and have even
/// length; otherwise Error(NonAlternatingHistory).
ChatRequest build_inference_request(const PromptTemplates& templates,
                                    const std::vector<ChatMessage>& history,
                                    const UserTurnInput& user);

ChatRequest build_correction_request(const PromptTemplates& templates, std::string_view query,
                                     std::string_view output);

ChatRequest build_teacher_request(const PromptTemplates& templates, std::string_view query,
                                  std::string_view output, std::string_view history = {});

ChatRequest build_caption_request(const PromptTemplates& templates, const std::string& image_ref);

/// Asks whether `instruction` calls for an image or text reply given the
/// rendered prior conversation.
ChatRequest build_intent_judge_request(const PromptTemplates& templates,
                                       std::string_view history, std::string_view instruction);

/// Reads a one-word IMAGE / TEXT answer (case-insensitive, surrounding
/// punctuation ignored). Throws Error(MalformedResponse) otherwise.
Modality parse_intent_verdict(std::string_view raw);

}  // namespace midsmith

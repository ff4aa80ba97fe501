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

#include <sstream>

#include "midsmith/core/error.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/output.hpp"

namespace midsmith {

std::string CompositionId::render() const {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out += ',';
    out += to_string(turns[i]);
  }
  return out;
}

CompositionId CompositionId::parse(std::string_view text) {
  CompositionId id;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    id.turns.push_back(parse_scenario(trim(text.substr(start, end - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (id.turns.empty() || id.turns.size() > static_cast<std::size_t>(kMaxCompositionTurns)) {
    throw Error(ErrorKind::InvalidArgument, "composition must have 1..6 turns");
  }
  return id;
}

std::vector<CompositionId> enumerate_compositions(int turn_count) {
  if (turn_count < 1 || turn_count > kMaxCompositionTurns) {
    throw Error(ErrorKind::InvalidArgument,
                "turn count must be within 1.." + std::to_string(kMaxCompositionTurns));
  }
  std::size_t total = 1;
  for (int i = 0; i < turn_count; ++i) total *= kAllScenarios.size();
  std::vector<CompositionId> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    CompositionId id;
    id.turns.resize(static_cast<std::size_t>(turn_count));
    std::size_t rest = code;
    for (int t = turn_count - 1; t >= 0; --t) {
      id.turns[static_cast<std::size_t>(t)] = kAllScenarios[rest % kAllScenarios.size()];
      rest /= kAllScenarios.size();
    }
    out.push_back(std::move(id));
  }
  return out;
}

nlohmann::ordered_json to_json(const CaptionedPair& p) {
  return {{"image_ref", p.image_ref}, {"caption", p.caption}};
}

CaptionedPair captioned_pair_from_json(const nlohmann::json& j) {
  try {
    return {j.at("image_ref").get<std::string>(), j.at("caption").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("captioned pair: ") + e.what());
  }
}

namespace {

std::string_view describe(ModalityScenario s) {
  switch (s.index()) {
    case 0: return "the user sends only text and the assistant replies in text";
    case 1: return "the user sends only text and the assistant replies by drawing an image";
    case 2: return "the user sends an image with text and the assistant replies in text";
    default: return "the user sends an image with text and the assistant replies by drawing an image";
  }
}

}  // namespace

std::string build_meta_prompt(const MetaPromptSpec& spec, const Vocabulary& vocab) {
  vocab.check(spec.topic, spec.edit_type);
  if (spec.composition.turns.empty()) {
    throw Error(ErrorKind::InvalidArgument, "composition is empty");
  }
  std::ostringstream p;
  const auto n = spec.composition.turns.size();
  p << "Write a " << n << "-turn conversation between a user and a multi-modal assistant. "
    << "The assistant either answers in text or draws an image. To draw, the assistant writes "
    << kDrawToken << " followed by a drawing prompt for a text-to-image model.\n\n";
  p << "Topic: " << spec.topic << "\n";
  if (spec.edit_type) {
    p << "Image editing method: " << *spec.edit_type
      << ". Every user request to change an earlier image uses this method.\n";
  }
  p << "Language: "
    << (spec.language == Language::Cn ? "write every user and assistant message in Chinese."
                                      : "write every user and assistant message in English.")
    << "\n\n";
  p << "Turn plan (" << spec.composition.render() << "):\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = spec.composition.turns[i];
    p << "Turn " << (i + 1) << " [" << to_string(s) << "]: " << describe(s) << ".\n";
  }
  p << "\nWhen a drawing builds on an image from an earlier turn, keep the objects of that image "
       "consistent: the new drawing prompt must satisfy the request while the previous drawing "
       "prompt is altered as little as possible.\n";
  if (!spec.icl_samples.empty()) {
    p << "\nWrite drawing prompts in the style of these image captions:\n";
    for (std::size_t i = 0; i < spec.icl_samples.size(); ++i) {
      p << "Example " << (i + 1) << ": " << spec.icl_samples[i].caption << "\n";
    }
  }
  p << "\nOutput one line per message, prefixed with \"User:\" or \"Assistant:\". Write an "
       "attached input image as <img>description</img> at the start of the user message.\n";
  return p.str();
}

}  // namespace midsmith

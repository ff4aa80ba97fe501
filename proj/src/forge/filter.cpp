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

#include <optional>
#include <variant>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/parallel.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/requests.hpp"

namespace midsmith {

namespace {

std::string prior_turn(const TurnSpec& t) {
  std::string s = "User: " + render_user_turn(t.user) + "\nAssistant: ";
  if (t.reference_response) {
    s += *t.reference_response;
  } else {
    s += t.expected_modality == Modality::Image ? "(an image)" : "(a text reply)";
  }
  return s;
}

using Outcome = std::variant<std::monostate, std::vector<TurnMismatch>, std::string>;

}  // namespace

FilterResult filter_intent_mismatch(const std::vector<ConversationRecord>& records,
                                    ChatBackend& judge, const PromptTemplates& templates,
                                    std::size_t parallelism) {
  // monostate: kept; mismatches: rejected; string: undecided.
  std::vector<Outcome> outcomes(records.size());
  parallel_for(records.size(), parallelism, [&](std::size_t i) {
    const auto& rec = records[i];
    std::vector<TurnMismatch> mismatches;
    std::string history;
    try {
      for (std::size_t t = 0; t < rec.turns.size(); ++t) {
        const auto& turn = rec.turns[t];
        const auto raw = judge.complete(
            build_intent_judge_request(templates, history, render_user_turn(turn.user)));
        const Modality judged = parse_intent_verdict(raw);
        if (judged != turn.expected_modality) {
          mismatches.push_back({static_cast<int>(t + 1), judged, turn.expected_modality});
        }
        if (!history.empty()) history += '\n';
        history += prior_turn(turn);
      }
    } catch (const Error& e) {
      outcomes[i] = std::string(e.what());
      return;
    }
    if (mismatches.empty()) {
      outcomes[i] = std::monostate{};
    } else {
      outcomes[i] = std::move(mismatches);
    }
  });

  FilterResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (std::holds_alternative<std::monostate>(outcomes[i])) {
      out.kept.push_back(records[i]);
    } else if (auto* m = std::get_if<std::vector<TurnMismatch>>(&outcomes[i])) {
      out.rejected.push_back({records[i], std::move(*m)});
    } else {
      out.undecided.push_back({records[i], std::get<std::string>(outcomes[i])});
    }
  }
  return out;
}

}  // namespace midsmith

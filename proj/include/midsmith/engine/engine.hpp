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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/types.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/templates.hpp"
#include "midsmith/protocol/verdict.hpp"

namespace midsmith {

struct EngineConfig {
  bool two_step = false;
  int image_width = 512;
  int image_height = 512;
  PromptTemplates templates = PromptTemplates::defaults();
  /// Where `templates` overrides came from, if anywhere.
  std::optional<std::string> templates_file;
  BackendConfig chat;
  BackendConfig t2i;
  /// Feed earlier generated images back to the chat model as image parts.
  /// Off by default: prior image turns are replayed as their drawing prompt.
  bool history_image_parts = false;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

nlohmann::ordered_json to_json(const EngineConfig& c);
/// Missing fields keep their defaults; `templates_file` is loaded when set.
EngineConfig engine_config_from_json(const nlohmann::json& j);

struct HistoryEntry {
  UserTurnInput user;
  ParsedAssistantOutput assistant;
  std::optional<GeneratedImage> image;
};

nlohmann::ordered_json to_json(const HistoryEntry& e);

/// Live dialogue state. The seed never changes after creation, so every
/// image of one conversation is drawn from the same generator seed.
struct Session {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<HistoryEntry> history;
  std::chrono::system_clock::time_point created_at;
};

struct CorrectionTrace {
  std::string first_response;
  /// Absent when the second completion could not be parsed.
  std::optional<CorrectionVerdict> verdict;
  /// Why the first response was kept despite a second pass, if it was.
  std::optional<std::string> fallback;

  bool operator==(const CorrectionTrace&) const = default;
};

struct AssistantResult {
  Modality modality = Modality::Text;
  /// Talk reply, or the drawing prompt for Image results.
  std::string text;
  std::optional<GeneratedImage> image;
  std::optional<CorrectionTrace> correction_trace;

  bool operator==(const AssistantResult&) const = default;
};

nlohmann::ordered_json to_json(const CorrectionTrace& t);
nlohmann::ordered_json to_json(const AssistantResult& r);

/// Seed used when no override is given: first 64 bits of SHA-256(id).
std::uint64_t derive_seed(const std::string& id);

/// A session plus the lock that serializes its turns.
class SessionSlot {
 public:
  explicit SessionSlot(Session s) : session_(std::move(s)) {}

  /// Copy of the last committed state; does not wait for a turn in flight.
  Session snapshot() const;

 private:
  friend class Engine;
  std::mutex turn_mu_;
  mutable std::mutex data_mu_;
  Session session_;
};

enum class BusyPolicy { Reject, Wait };

/// Drives one chat backend and one T2I backend through the draw-token
/// protocol. Immutable after construction; share freely across threads.
class Engine {
 public:
  Engine(EngineConfig config, std::shared_ptr<ChatBackend> chat, std::shared_ptr<T2IBackend> t2i);

  const EngineConfig& config() const noexcept { return config_; }

  Session new_session(std::optional<std::uint64_t> seed_override = std::nullopt) const;
  /// Session with a caller-chosen id (evaluation uses the conversation id).
  Session new_session(std::string id, std::optional<std::uint64_t> seed_override) const;

  /// Single-pass turn. On failure the session is left untouched.
  AssistantResult step(Session& session, const UserTurnInput& user) const;

  /// Draft, self-check with the correction prompt, then commit the final
  /// answer. At most one image is generated, for the final answer only.
  AssistantResult step_two_stage(Session& session, const UserTurnInput& user) const;

  /// step or step_two_stage according to config().two_step.
  AssistantResult turn(Session& session, const UserTurnInput& user) const;

  /// Serialized turn on a shared session. With BusyPolicy::Reject a turn
  /// already in flight makes this throw Error(Busy).
  AssistantResult turn(SessionSlot& slot, const UserTurnInput& user,
                       BusyPolicy policy = BusyPolicy::Reject) const;

  /// Chat messages replaying `session`'s history.
  std::vector<ChatMessage> history_messages(const Session& session) const;

 private:
  std::string first_pass(const Session& session, const UserTurnInput& user) const;
  AssistantResult commit(Session& session, const UserTurnInput& user, ParsedAssistantOutput parsed,
                         std::optional<CorrectionTrace> trace) const;

  EngineConfig config_;
  std::shared_ptr<ChatBackend> chat_;
  std::shared_ptr<T2IBackend> t2i_;
};

/// Immutable copy of the transcript.
std::vector<HistoryEntry> history_snapshot(const Session& session);

}  // namespace midsmith

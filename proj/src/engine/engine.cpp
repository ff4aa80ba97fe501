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

#include "midsmith/engine/engine.hpp"

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/protocol/requests.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

void EngineConfig::validate() const {
  if (image_width < 1 || image_height < 1 || image_width > kMaxImageSide ||
      image_height > kMaxImageSide) {
    throw Error(ErrorKind::InvalidConfig, "image dimensions must be within 1.." +
                                              std::to_string(kMaxImageSide));
  }
  templates.validate();
  chat.validate();
  t2i.validate();
}

ordered_json to_json(const EngineConfig& c) {
  ordered_json j;
  j["two_step"] = c.two_step;
  j["image_width"] = c.image_width;
  j["image_height"] = c.image_height;
  j["history_image_parts"] = c.history_image_parts;
  j["templates_file"] = c.templates_file ? json(*c.templates_file) : json(nullptr);
  j["chat"] = to_json(c.chat);
  j["t2i"] = to_json(c.t2i);
  return j;
}

EngineConfig engine_config_from_json(const json& j) {
  EngineConfig c;
  try {
    c.two_step = j.value("two_step", c.two_step);
    c.image_width = j.value("image_width", c.image_width);
    c.image_height = j.value("image_height", c.image_height);
    c.history_image_parts = j.value("history_image_parts", c.history_image_parts);
    if (j.contains("templates_file") && !j["templates_file"].is_null()) {
      c.templates_file = j["templates_file"].get<std::string>();
      c.templates = PromptTemplates::load_overrides(*c.templates_file);
    }
    if (j.contains("chat")) c.chat = backend_config_from_json(j["chat"]);
    if (j.contains("t2i")) c.t2i = backend_config_from_json(j["t2i"]);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("engine config: ") + e.what());
  }
  c.validate();
  return c;
}

ordered_json to_json(const HistoryEntry& e) {
  ordered_json j;
  j["user"] = to_json(e.user);
  j["modality"] = std::string(to_string(e.assistant.modality));
  j["text"] = e.assistant.text;
  if (e.image) j["image"] = to_json(*e.image);
  return j;
}

ordered_json to_json(const CorrectionTrace& t) {
  ordered_json j;
  j["first_response"] = t.first_response;
  if (t.verdict) j["verdict"] = to_json(*t.verdict);
  if (t.fallback) j["fallback"] = *t.fallback;
  return j;
}

ordered_json to_json(const AssistantResult& r) {
  ordered_json j;
  j["modality"] = std::string(to_string(r.modality));
  j["text"] = r.text;
  if (r.image) j["image"] = to_json(*r.image);
  if (r.correction_trace) j["correction_trace"] = to_json(*r.correction_trace);
  return j;
}

std::uint64_t derive_seed(const std::string& id) { return digest_u64(id); }

Session SessionSlot::snapshot() const {
  std::lock_guard lock(data_mu_);
  return session_;
}

Engine::Engine(EngineConfig config, std::shared_ptr<ChatBackend> chat,
               std::shared_ptr<T2IBackend> t2i)
    : config_(std::move(config)), chat_(std::move(chat)), t2i_(std::move(t2i)) {
  if (!chat_ || !t2i_) throw Error(ErrorKind::InvalidConfig, "engine needs chat and t2i backends");
  if (config_.image_width < 1 || config_.image_height < 1 ||
      config_.image_width > kMaxImageSide || config_.image_height > kMaxImageSide) {
    throw Error(ErrorKind::InvalidConfig, "bad image dimensions");
  }
  config_.templates.validate();
}

Session Engine::new_session(std::optional<std::uint64_t> seed_override) const {
  return new_session(new_uuid(), seed_override);
}

Session Engine::new_session(std::string id, std::optional<std::uint64_t> seed_override) const {
  Session s;
  s.seed = seed_override ? *seed_override : derive_seed(id);
  s.id = std::move(id);
  s.created_at = std::chrono::system_clock::now();
  return s;
}

std::vector<ChatMessage> Engine::history_messages(const Session& session) const {
  std::vector<ChatMessage> messages;
  messages.reserve(session.history.size() * 2);
  for (const auto& e : session.history) {
    messages.push_back(user_message(e.user));
    ChatMessage reply{Role::Assistant, {ContentPart::text(render_output(e.assistant))}};
    if (config_.history_image_parts && e.image) {
      reply.parts.push_back(ContentPart::image_ref(e.image->content_address));
    }
    messages.push_back(std::move(reply));
  }
  return messages;
}

std::string Engine::first_pass(const Session& session, const UserTurnInput& user) const {
  if (user.text.empty()) throw Error(ErrorKind::InvalidArgument, "user text is empty");
  const auto request = build_inference_request(config_.templates, history_messages(session), user);
  return chat_->complete(request);
}

namespace {

ParsedAssistantOutput parse_or_fail(std::string_view raw) {
  try {
    return parse_output(raw);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptyOutput) throw Error(ErrorKind::ParseFailure, e.what());
    throw;
  }
}

}  // namespace

AssistantResult Engine::commit(Session& session, const UserTurnInput& user,
                               ParsedAssistantOutput parsed,
                               std::optional<CorrectionTrace> trace) const {
  AssistantResult result;
  result.modality = parsed.modality;
  result.text = parsed.text;
  result.correction_trace = std::move(trace);
  if (parsed.modality == Modality::Image) {
    result.image = t2i_->generate(
        T2IRequest{parsed.text, session.seed, config_.image_width, config_.image_height});
  }
  session.history.push_back({user, std::move(parsed), result.image});
  return result;
}

AssistantResult Engine::step(Session& session, const UserTurnInput& user) const {
  auto parsed = parse_or_fail(first_pass(session, user));
  return commit(session, user, std::move(parsed), std::nullopt);
}

AssistantResult Engine::step_two_stage(Session& session, const UserTurnInput& user) const {
  const auto first_raw = first_pass(session, user);
  auto first = parse_or_fail(first_raw);

  CorrectionTrace trace;
  trace.first_response = std::string(trim(first_raw));
  const auto second_raw = chat_->complete(
      build_correction_request(config_.templates, render_user_turn(user), trace.first_response));

  ParsedAssistantOutput final_output = first;
  try {
    trace.verdict = parse_teacher_verdict(second_raw);
    if (trace.verdict->kind == CorrectionVerdict::Kind::Wrong) {
      try {
        final_output = parse_output(*trace.verdict->corrected_output);
      } catch (const Error& e) {
        final_output = first;
        trace.fallback = std::string("corrected output unusable: ") + e.what();
      }
    }
  } catch (const Error& e) {
    trace.verdict.reset();
    trace.fallback = std::string("second pass unparseable: ") + e.what();
  }
  return commit(session, user, std::move(final_output), std::move(trace));
}

AssistantResult Engine::turn(Session& session, const UserTurnInput& user) const {
  return config_.two_step ? step_two_stage(session, user) : step(session, user);
}

AssistantResult Engine::turn(SessionSlot& slot, const UserTurnInput& user,
                             BusyPolicy policy) const {
  std::unique_lock lock(slot.turn_mu_, std::defer_lock);
  if (policy == BusyPolicy::Reject) {
    if (!lock.try_lock()) throw Error(ErrorKind::Busy, "a turn is already in flight");
  } else {
    lock.lock();
  }
  // Work on a copy so a failed turn leaves the stored session untouched.
  Session working = slot.snapshot();
  auto result = turn(working, user);
  std::lock_guard data_lock(slot.data_mu_);
  slot.session_ = std::move(working);
  return result;
}

std::vector<HistoryEntry> history_snapshot(const Session& session) { return session.history; }

}  // namespace midsmith

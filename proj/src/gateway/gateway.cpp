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

#include "midsmith/gateway/gateway.hpp"

#include <ctime>

#include <httplib.h>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/eval/report.hpp"
#include "midsmith/eval/runner.hpp"
#include "midsmith/version.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// SessionStore

SessionStore::SessionStore(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

std::shared_ptr<SessionSlot> SessionStore::insert(Session session) {
  const std::string id = session.id;
  auto slot = std::make_shared<SessionSlot>(std::move(session));
  std::lock_guard lock(mu_);
  if (auto it = slots_.find(id); it != slots_.end()) {
    order_.erase(it->second.second);
    slots_.erase(it);
  }
  while (slots_.size() >= capacity_) {
    const std::string victim = order_.back();
    order_.pop_back();
    slots_.erase(victim);
    evicted_.insert(victim);
  }
  order_.push_front(id);
  slots_.emplace(id, std::make_pair(slot, order_.begin()));
  evicted_.erase(id);
  return slot;
}

SessionStore::Lookup SessionStore::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return {nullptr, evicted_.count(id) > 0};
  order_.splice(order_.begin(), order_, it->second.second);
  return {it->second.first, false};
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

// ---------------------------------------------------------------------------
// Jobs and responses

std::string_view to_string(JobState s) noexcept {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "queued";
}

ordered_json to_json(const EvalJob& job) {
  ordered_json j;
  j["id"] = job.id;
  j["state"] = std::string(to_string(job.state));
  j["dataset_path"] = job.dataset_path;
  j["coherence"] = job.coherence;
  j["two_step"] = job.two_step;
  j["started_at"] = job.started_at ? json(*job.started_at) : json(nullptr);
  j["finished_at"] = job.finished_at ? json(*job.finished_at) : json(nullptr);
  j["report_path"] = job.report_path ? json(*job.report_path) : json(nullptr);
  if (job.error) j["error"] = *job.error;
  if (job.report) j["report"] = *job.report;
  return j;
}

GatewayDeps GatewayDeps::from_config(const AppConfig& config) {
  std::vector<std::filesystem::path> assets(config.asset_dirs.begin(), config.asset_dirs.end());
  GatewayDeps d;
  d.store = std::make_shared<FsImageStore>(config.image_store_dir, std::move(assets));
  d.chat = make_chat_backend(config.engine.chat, d.store);
  d.t2i = make_t2i_backend(config.engine.t2i, d.store);
  d.vqa = make_vqa_backend(config.vqa, d.store);
  return d;
}

std::string image_url(const std::string& address) { return "/images/" + address; }

ordered_json message_response(const AssistantResult& r) {
  ordered_json j;
  j["modality"] = std::string(to_string(r.modality));
  j["text"] = r.text;
  if (r.modality == Modality::Image) {
    if (r.image) j["image_url"] = image_url(r.image->content_address);
    j["drawing_prompt"] = r.text;
  }
  if (r.correction_trace) j["correction_trace"] = to_json(*r.correction_trace);
  return j;
}

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Busy: return 409;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::Timeout:
    case ErrorKind::MalformedResponse:
    case ErrorKind::ScriptMiss:
    case ErrorKind::SafetyRejection:
    case ErrorKind::ParseFailure:
    case ErrorKind::EmptyOutput:
      return 502;
    case ErrorKind::ImageNotFound: return 404;
    case ErrorKind::Io: return 500;
    default: return 400;
  }
}

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct HttpError {
  int status;
  std::string kind;
  std::string message;
};

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind,
                const std::string& message) {
  send_json(res, status, ordered_json{{"error", kind}, {"message", message}});
}

json parse_body(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw HttpError{400, "InvalidArgument", "request body is required"};
  }
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw HttpError{400, "InvalidArgument", "body must be a JSON object"};
  }
  return j;
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.kind, e.message);
    } catch (const Error& e) {
      send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "InvalidArgument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

ordered_json history_json(const Session& s) {
  ordered_json j;
  j["session_id"] = s.id;
  j["seed"] = s.seed;
  j["turns"] = ordered_json::array();
  for (const auto& e : s.history) {
    ordered_json t;
    t["user"] = to_json(e.user);
    if (e.user.image_ref) t["user"]["image_url"] = image_url(*e.user.image_ref);
    t["modality"] = std::string(to_string(e.assistant.modality));
    t["text"] = e.assistant.text;
    if (e.assistant.modality == Modality::Image) {
      if (e.image) t["image_url"] = image_url(e.image->content_address);
      t["drawing_prompt"] = e.assistant.text;
    }
    j["turns"].push_back(std::move(t));
  }
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(AppConfig config, GatewayDeps deps)
    : config_(std::move(config)),
      deps_(std::move(deps)),
      engine_(config_.engine, deps_.chat, deps_.t2i),
      sessions_(static_cast<std::size_t>(config_.session_capacity)),
      server_(std::make_unique<httplib::Server>()) {
  config_.validate();
  if (!deps_.store || !deps_.chat || !deps_.t2i) {
    throw Error(ErrorKind::InvalidConfig, "gateway needs an image store, chat and t2i backends");
  }
  routes();
  for (int i = 0; i < config_.eval_workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Gateway::~Gateway() { stop(); }

int Gateway::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void Gateway::run() { server_->listen_after_bind(); }

void Gateway::stop() {
  std::call_once(stop_once_, [this] {
    server_->stop();
    {
      std::lock_guard lock(jobs_mu_);
      stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& w : workers_) {
      if (w.joinable()) w.join();
    }
  });
}

void Gateway::routes() {
  auto& s = *server_;

  s.Get("/v1/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, ordered_json{{"version", kVersion}});
  }));

  s.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req, true);
    std::optional<std::uint64_t> seed;
    if (body.contains("seed") && !body["seed"].is_null()) {
      if (!body["seed"].is_number_unsigned()) {
        throw HttpError{400, "InvalidArgument", "seed must be a non-negative integer"};
      }
      seed = body["seed"].get<std::uint64_t>();
    }
    auto slot = sessions_.insert(engine_.new_session(seed));
    const Session snap = slot->snapshot();
    send_json(res, 201, ordered_json{{"session_id", snap.id}, {"seed", snap.seed}});
  }));

  auto find_slot = [this](const std::string& id) {
    auto found = sessions_.find(id);
    if (found.slot) return found.slot;
    if (found.evicted) throw HttpError{410, "Evicted", "session " + id + " was evicted"};
    throw HttpError{404, "NotFound", "unknown session " + id};
  };

  s.Post(R"(/v1/sessions/([^/]+)/messages)",
         guarded([this, find_slot](const httplib::Request& req, httplib::Response& res) {
           auto slot = find_slot(req.matches[1]);
           const json body = parse_body(req, false);
           if (!body.contains("text") || !body["text"].is_string() ||
               body["text"].get<std::string>().empty()) {
             throw HttpError{400, "InvalidArgument", "text must be a non-empty string"};
           }
           UserTurnInput user{body["text"].get<std::string>(), std::nullopt};
           if (body.contains("image_b64") && !body["image_b64"].is_null()) {
             const std::string bytes = base64_decode(body["image_b64"].get<std::string>());
             if (bytes.empty()) throw HttpError{400, "InvalidArgument", "image_b64 is empty"};
             user.image_ref = deps_.store->put(bytes);
           }
           const auto result = engine_.turn(*slot, user, BusyPolicy::Reject);
           send_json(res, 200, message_response(result));
         }));

  s.Get(R"(/v1/sessions/([^/]+)/history)",
        guarded([find_slot](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, history_json(find_slot(req.matches[1])->snapshot()));
        }));

  s.Get(R"(/images/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string addr = req.matches[1];
    if (!is_content_address(addr)) {
      throw HttpError{400, "InvalidArgument", "not a content address"};
    }
    auto bytes = deps_.store->get(addr);
    if (!bytes) throw HttpError{404, "NotFound", "no image " + addr};
    const std::string mime = sniff_mime(*bytes);
    res.status = 200;
    res.set_content(std::move(*bytes), mime.c_str());
  }));

  s.Post("/v1/eval", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req, false);
    if (!body.contains("dataset_path") || !body["dataset_path"].is_string()) {
      throw HttpError{400, "InvalidArgument", "dataset_path is required"};
    }
    const auto id = submit_eval(body["dataset_path"].get<std::string>(),
                                body.value("coherence", false), body.value("two_step", false));
    send_json(res, 202, ordered_json{{"job_id", id}});
  }));

  s.Get(R"(/v1/eval/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto j = job(req.matches[1]);
    if (!j) throw HttpError{404, "NotFound", "unknown job"};
    send_json(res, 200, to_json(*j));
  }));
}

std::string Gateway::submit_eval(const std::string& dataset_path, bool coherence, bool two_step) {
  if (coherence && !deps_.vqa) {
    throw Error(ErrorKind::InvalidConfig, "coherence scoring needs a VQA backend");
  }
  EvalJob job;
  job.id = new_uuid();
  job.dataset_path = dataset_path;
  job.coherence = coherence;
  job.two_step = two_step;
  {
    std::lock_guard lock(jobs_mu_);
    if (stopping_) throw Error(ErrorKind::BackendUnavailable, "gateway is shutting down");
    jobs_.emplace(job.id, job);
    queue_.push_back(job.id);
  }
  jobs_cv_.notify_one();
  return job.id;
}

std::optional<EvalJob> Gateway::job(const std::string& id) const {
  std::lock_guard lock(jobs_mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void Gateway::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(jobs_mu_);
      jobs_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      auto& j = jobs_.at(id);
      j.state = JobState::Running;
      j.started_at = utc_now();
    }
    run_job(id);
  }
}

void Gateway::run_job(const std::string& id) {
  EvalJob snapshot = *job(id);
  std::filesystem::path dataset = snapshot.dataset_path;
  if (dataset.is_relative()) dataset = std::filesystem::path(config_.dataset_dir) / dataset;
  std::optional<std::string> error;
  json report;
  const auto out_dir = std::filesystem::path(config_.report_dir) / id;
  try {
    std::optional<Vocabulary> vocab;
    if (config_.vocab_file) vocab = Vocabulary::load(*config_.vocab_file);
    const auto records = load_dataset(dataset, vocab ? &*vocab : nullptr);
    EngineConfig ec = config_.engine;
    ec.two_step = snapshot.two_step;
    const Engine engine(ec, deps_.chat, deps_.t2i);
    const auto result =
        evaluate_dataset(records, engine, snapshot.coherence ? deps_.vqa.get() : nullptr,
                         static_cast<std::size_t>(config_.parallelism));
    write_eval_outputs(result, out_dir);
    report = report_json(result.ms, result.coherence ? &*result.coherence : nullptr);
  } catch (const std::exception& e) {
    error = e.what();
  }
  std::lock_guard lock(jobs_mu_);
  auto& j = jobs_.at(id);
  j.finished_at = utc_now();
  if (error) {
    j.state = JobState::Failed;
    j.error = *error;
  } else {
    j.state = JobState::Done;
    j.report_path = (out_dir / "report.json").string();
    j.report = std::move(report);
  }
}

}  // namespace midsmith

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
#include <condition_variable>
#include <deque>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "midsmith/backends/backend.hpp"
#include "midsmith/backends/image_store.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/engine/engine.hpp"
#include "midsmith/gateway/config.hpp"

namespace httplib {
class Server;
}

namespace midsmith {

/// In-memory sessions with least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity);

  std::shared_ptr<SessionSlot> insert(Session session);

  struct Lookup {
    std::shared_ptr<SessionSlot> slot;  // null when absent
    bool evicted = false;
  };
  /// Marks the session as most recently used.
  Lookup find(const std::string& id);

  std::size_t size() const;

 private:
  using Order = std::list<std::string>;

  mutable std::mutex mu_;
  std::size_t capacity_;
  Order order_;  // front is most recent
  std::unordered_map<std::string, std::pair<std::shared_ptr<SessionSlot>, Order::iterator>> slots_;
  std::unordered_set<std::string> evicted_;
};

enum class JobState { Queued, Running, Done, Failed };

std::string_view to_string(JobState s) noexcept;

struct EvalJob {
  std::string id;
  JobState state = JobState::Queued;
  std::string dataset_path;
  bool coherence = false;
  bool two_step = false;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  std::optional<std::string> report_path;
  std::optional<std::string> error;
  std::optional<nlohmann::json> report;
};

nlohmann::ordered_json to_json(const EvalJob& job);

/// Backends and storage the gateway drives.
struct GatewayDeps {
  std::shared_ptr<ImageStore> store;
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<T2IBackend> t2i;
  std::shared_ptr<VqaBackend> vqa;

  /// Filesystem image store plus backends built from `config`.
  static GatewayDeps from_config(const AppConfig& config);
};

/// Response body for one assistant turn. The gateway sends exactly this.
nlohmann::ordered_json message_response(const AssistantResult& result);

std::string image_url(const std::string& address);

/// HTTP status for an error kind raised while serving a request.
int http_status(ErrorKind kind) noexcept;

class Gateway {
 public:
  Gateway(AppConfig config, GatewayDeps deps);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  /// Throws Error(Io) on bind failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  /// Stops accepting connections, lets in-flight requests and the running
  /// eval job finish, then returns. Queued jobs stay queued.
  void stop();

  const Engine& engine() const noexcept { return engine_; }
  SessionStore& sessions() noexcept { return sessions_; }

  /// Queue an evaluation; returns the job id.
  std::string submit_eval(const std::string& dataset_path, bool coherence, bool two_step);
  std::optional<EvalJob> job(const std::string& id) const;

 private:
  void routes();
  void worker_loop();
  void run_job(const std::string& id);

  AppConfig config_;
  GatewayDeps deps_;
  Engine engine_;
  SessionStore sessions_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex jobs_mu_;
  std::condition_variable jobs_cv_;
  std::map<std::string, EvalJob> jobs_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
  std::once_flag stop_once_;
};

}  // namespace midsmith

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

#include "midsmith/backends/http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "midsmith/backends/image_store.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;

namespace {

struct SemaphoreGuard {
  std::counting_semaphore<1024>& sem;
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

std::string load_image_b64(const ImageStore* store, const std::string& address) {
  if (!store) throw Error(ErrorKind::ImageNotFound, address + " (no image store)");
  auto bytes = store->get(address);
  if (!bytes) throw Error(ErrorKind::ImageNotFound, address);
  return base64_encode(*bytes);
}

}  // namespace

HttpTransport::HttpTransport(BackendConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  config_.validate();
  const auto& url = *config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "base_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  if (path_start != std::string::npos) prefix_ = url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

json HttpTransport::post(const std::string& path, const json& body) {
  SemaphoreGuard guard(in_flight_);

  httplib::Headers headers{{"x-request-id", new_uuid()}};
  if (config_.auth_token_env) {
    if (const char* token = std::getenv(config_.auth_token_env->c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const auto payload = body.dump();
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);

  Error last(ErrorKind::BackendUnavailable, "no attempt made");
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms) *
                                  (1 << std::min(attempt - 1, 16)));
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(prefix_ + path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out =
          err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last = Error(timed_out ? ErrorKind::Timeout : ErrorKind::BackendUnavailable,
                   origin_ + prefix_ + path + ": " + httplib::to_string(err));
      continue;
    }
    if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("invalid JSON body: ") + e.what());
      }
    }
    const std::string what = origin_ + prefix_ + path + " returned " + std::to_string(res->status);
    if (res->status == 429 || res->status >= 500) {
      last = Error(ErrorKind::BackendUnavailable, what);
      continue;
    }
    if (res->status == 422) throw Error(ErrorKind::SafetyRejection, what);
    throw Error(ErrorKind::BackendUnavailable, what);
  }
  throw last;
}

HttpChat::HttpChat(BackendConfig config, std::shared_ptr<ImageStore> store)
    : transport_(std::move(config)), store_(std::move(store)) {}

std::string HttpChat::complete(const ChatRequest& request) {
  validate(request);
  ChatRequest wire = request;
  for (auto& m : wire.messages) {
    for (auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::ImageRef) {
        p = ContentPart::image_b64(load_image_b64(store_.get(), p.value));
      }
    }
  }
  const auto res = transport_.post("/chat", to_json(wire));
  if (!res.is_object() || !res.contains("content") || !res["content"].is_string()) {
    throw Error(ErrorKind::MalformedResponse, "chat response lacks a string 'content'");
  }
  return res["content"].get<std::string>();
}

HttpT2I::HttpT2I(BackendConfig config, std::shared_ptr<ImageStore> store)
    : transport_(std::move(config)), store_(std::move(store)) {
  if (!store_) throw Error(ErrorKind::InvalidConfig, "t2i client needs an image store");
}

GeneratedImage HttpT2I::generate(const T2IRequest& request) {
  validate(request);
  const json body = {{"prompt", request.prompt},
                     {"seed", request.seed},
                     {"width", request.width},
                     {"height", request.height}};
  const auto res = transport_.post("/t2i", body);
  if (!res.is_object() || !res.contains("image_b64") || !res["image_b64"].is_string()) {
    throw Error(ErrorKind::MalformedResponse, "t2i response lacks 'image_b64'");
  }
  std::string bytes;
  try {
    bytes = base64_decode(res["image_b64"].get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedResponse, e.what());
  }
  std::string mime = res.contains("mime") && res["mime"].is_string()
                         ? res["mime"].get<std::string>()
                         : sniff_mime(bytes);
  return {store_->put(bytes), bytes.size(), std::move(mime)};
}

HttpVqa::HttpVqa(BackendConfig config, std::shared_ptr<ImageStore> store)
    : transport_(std::move(config)), store_(std::move(store)) {}

double HttpVqa::probability(const std::string& image_address, const VqaItem& item) {
  const json body = {{"image_b64", load_image_b64(store_.get(), image_address)},
                     {"question", item.question},
                     {"answer", item.expected_answer}};
  const auto res = transport_.post("/vqa", body);
  if (!res.is_object() || !res.contains("prob") || !res["prob"].is_number()) {
    throw Error(ErrorKind::MalformedResponse, "vqa response lacks a numeric 'prob'");
  }
  const double p = res["prob"].get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::MalformedResponse, "vqa probability outside [0, 1]");
  }
  return p;
}

}  // namespace midsmith

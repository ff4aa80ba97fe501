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

#include "midsmith/backends/backend.hpp"

#include "midsmith/backends/http.hpp"
#include "midsmith/backends/image_store.hpp"
#include "midsmith/backends/mock.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

void validate(const T2IRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorKind::InvalidArgument, "t2i prompt is empty");
  if (request.width < 1 || request.height < 1 || request.width > kMaxImageSide ||
      request.height > kMaxImageSide) {
    throw Error(ErrorKind::InvalidArgument, "t2i dimensions must be within 1.." +
                                                std::to_string(kMaxImageSide));
  }
}

ordered_json to_json(const GeneratedImage& image) {
  ordered_json j;
  j["content_address"] = image.content_address;
  j["bytes_len"] = image.bytes_len;
  j["mime"] = image.mime;
  return j;
}

GeneratedImage generated_image_from_json(const json& j) {
  return {j.at("content_address").get<std::string>(), j.at("bytes_len").get<std::size_t>(),
          j.at("mime").get<std::string>()};
}

void BackendConfig::validate() const {
  if (kind == Kind::Http && (!base_url || base_url->empty())) {
    throw Error(ErrorKind::InvalidConfig, "http backend needs base_url");
  }
  if (timeout_ms < 1) throw Error(ErrorKind::InvalidConfig, "timeout_ms must be positive");
  if (max_retries < 0) throw Error(ErrorKind::InvalidConfig, "max_retries must be >= 0");
  if (retry_backoff_ms < 0) throw Error(ErrorKind::InvalidConfig, "retry_backoff_ms must be >= 0");
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw Error(ErrorKind::InvalidConfig, "max_in_flight must be within 1..1024");
  }
}

ordered_json to_json(const BackendConfig& c) {
  ordered_json j;
  j["kind"] = c.kind == BackendConfig::Kind::Http ? "http" : "mock";
  j["base_url"] = c.base_url ? json(*c.base_url) : json(nullptr);
  j["auth_token_env"] = c.auth_token_env ? json(*c.auth_token_env) : json(nullptr);
  j["timeout_ms"] = c.timeout_ms;
  j["max_retries"] = c.max_retries;
  j["retry_backoff_ms"] = c.retry_backoff_ms;
  j["max_in_flight"] = c.max_in_flight;
  j["script_file"] = c.script_file ? json(*c.script_file) : json(nullptr);
  return j;
}

BackendConfig backend_config_from_json(const json& j) {
  BackendConfig c;
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
  };
  try {
    const auto kind = j.value("kind", std::string("mock"));
    if (kind == "http") {
      c.kind = BackendConfig::Kind::Http;
    } else if (kind != "mock") {
      throw Error(ErrorKind::InvalidConfig, "backend kind must be mock or http");
    }
    c.base_url = opt("base_url");
    c.auth_token_env = opt("auth_token_env");
    c.script_file = opt("script_file");
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.retry_backoff_ms = j.value("retry_backoff_ms", c.retry_backoff_ms);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("backend config: ") + e.what());
  }
  c.validate();
  return c;
}

std::shared_ptr<ChatBackend> make_chat_backend(const BackendConfig& config,
                                               std::shared_ptr<ImageStore> store) {
  config.validate();
  if (config.kind == BackendConfig::Kind::Http) {
    return std::make_shared<HttpChat>(config, std::move(store));
  }
  return std::make_shared<MockChat>(config.script_file ? ChatScript::load(*config.script_file)
                                                       : ChatScript{});
}

std::shared_ptr<T2IBackend> make_t2i_backend(const BackendConfig& config,
                                             std::shared_ptr<ImageStore> store) {
  config.validate();
  if (config.kind == BackendConfig::Kind::Http) {
    return std::make_shared<HttpT2I>(config, std::move(store));
  }
  if (config.script_file) return MockT2I::load(*config.script_file, std::move(store));
  return std::make_shared<MockT2I>(std::move(store));
}

std::shared_ptr<VqaBackend> make_vqa_backend(const BackendConfig& config,
                                             std::shared_ptr<ImageStore> store) {
  config.validate();
  if (config.kind == BackendConfig::Kind::Http) {
    return std::make_shared<HttpVqa>(config, std::move(store));
  }
  if (config.script_file) return MockVqa::load(*config.script_file, std::move(store));
  return std::make_shared<MockVqa>(MockVqa::Table{}, std::move(store));
}

}  // namespace midsmith

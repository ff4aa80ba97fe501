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

#include <memory>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "midsmith/backends/backend.hpp"

namespace midsmith {

class ImageStore;

/// JSON-over-HTTP transport shared by the wire clients.
///
/// Each logical call carries one client-generated "x-request-id" that is
/// reused across retries so a server can de-duplicate. Connection failures,
/// 429 and 5xx are retried up to `max_retries` times with exponential
/// backoff; 422 maps to SafetyRejection; any other non-200 is
/// BackendUnavailable. At most `max_in_flight` calls run at once.
class HttpTransport {
 public:
  explicit HttpTransport(BackendConfig config);

  nlohmann::json post(const std::string& path, const nlohmann::json& body);

 private:
  BackendConfig config_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix, no trailing slash
  std::counting_semaphore<1024> in_flight_;
};

/// POST {base_url}/chat  {system?, messages} -> {content}
/// Image parts given by address are inlined as base64 from `store`.
class HttpChat final : public ChatBackend {
 public:
  HttpChat(BackendConfig config, std::shared_ptr<ImageStore> store);
  std::string complete(const ChatRequest& request) override;

 private:
  HttpTransport transport_;
  std::shared_ptr<ImageStore> store_;
};

/// POST {base_url}/t2i  {prompt, seed, width, height} -> {image_b64, mime}
class HttpT2I final : public T2IBackend {
 public:
  HttpT2I(BackendConfig config, std::shared_ptr<ImageStore> store);
  GeneratedImage generate(const T2IRequest& request) override;

 private:
  HttpTransport transport_;
  std::shared_ptr<ImageStore> store_;
};

/// POST {base_url}/vqa  {image_b64, question, answer} -> {prob}
/// Probabilities outside [0, 1] are rejected, never clamped.
class HttpVqa final : public VqaBackend {
 public:
  HttpVqa(BackendConfig config, std::shared_ptr<ImageStore> store);
  double probability(const std::string& image_address, const VqaItem& item) override;

 private:
  HttpTransport transport_;
  std::shared_ptr<ImageStore> store_;
};

}  // namespace midsmith

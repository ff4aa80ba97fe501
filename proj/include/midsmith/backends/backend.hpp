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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "midsmith/backends/chat_request.hpp"
#include "midsmith/core/types.hpp"

namespace midsmith {

class ImageStore;

struct T2IRequest {
  std::string prompt;
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;

  bool operator==(const T2IRequest&) const = default;
};

inline constexpr int kMaxImageSide = 4096;

/// Throws Error(InvalidArgument).
void validate(const T2IRequest& request);

struct GeneratedImage {
  std::string content_address;
  std::size_t bytes_len = 0;
  std::string mime;

  bool operator==(const GeneratedImage&) const = default;
};

nlohmann::ordered_json to_json(const GeneratedImage& image);
GeneratedImage generated_image_from_json(const nlohmann::json& j);

/// Chat model role: the dialogue model, the student, the judge and the
/// teacher corrector all speak this interface.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Raw completion text for a valid request.
  virtual std::string complete(const ChatRequest& request) = 0;
};

class T2IBackend {
 public:
  virtual ~T2IBackend() = default;
  /// Generates, stores, and describes one image.
  virtual GeneratedImage generate(const T2IRequest& request) = 0;
};

class VqaBackend {
 public:
  virtual ~VqaBackend() = default;
  /// P(answer == item.expected_answer | image, item.question), in [0, 1].
  virtual double probability(const std::string& image_address, const VqaItem& item) = 0;
};

struct BackendConfig {
  enum class Kind { Mock, Http };

  Kind kind = Kind::Mock;
  std::optional<std::string> base_url;
  /// Name of the environment variable holding a bearer token.
  std::optional<std::string> auth_token_env;
  int timeout_ms = 30000;
  int max_retries = 2;
  /// First retry delay; doubles on every further attempt.
  int retry_backoff_ms = 100;
  int max_in_flight = 4;
  /// Mock only: JSON script of canned responses.
  std::optional<std::string> script_file;

  /// Throws Error(InvalidConfig).
  void validate() const;
  bool operator==(const BackendConfig&) const = default;
};

nlohmann::ordered_json to_json(const BackendConfig& c);
BackendConfig backend_config_from_json(const nlohmann::json& j);

std::shared_ptr<ChatBackend> make_chat_backend(const BackendConfig& config,
                                               std::shared_ptr<ImageStore> store);
std::shared_ptr<T2IBackend> make_t2i_backend(const BackendConfig& config,
                                             std::shared_ptr<ImageStore> store);
std::shared_ptr<VqaBackend> make_vqa_backend(const BackendConfig& config,
                                             std::shared_ptr<ImageStore> store);

}  // namespace midsmith

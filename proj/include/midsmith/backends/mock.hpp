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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

class ImageStore;

/// Canned chat responses. Lookup order: request digest, then the text of the
/// last user message, then `responder`. Nothing depends on call order.
///
/// File form:
///     {"responses": [{"digest": "...", "response": "..."},
///                    {"last_user": "...", "response": "..."},
///                    {"last_user": "...", "error": "BackendUnavailable"}]}
struct ChatScript {
  struct Entry {
    std::optional<std::string> response;
    std::optional<ErrorKind> error;
  };

  std::map<std::string, Entry> by_digest;
  std::map<std::string, Entry> by_last_user;
  std::function<std::optional<std::string>(const ChatRequest&)> responder;

  ChatScript& on_digest(const ChatRequest& request, std::string response);
  ChatScript& on_last_user(std::string text, std::string response);
  ChatScript& fail_on_last_user(std::string text, ErrorKind kind);

  static ChatScript load(const std::filesystem::path& path);
};

class MockChat final : public ChatBackend {
 public:
  explicit MockChat(ChatScript script) : script_(std::move(script)) {}
  std::string complete(const ChatRequest& request) override;

 private:
  const ChatScript script_;
};

/// Emits a small PNG whose pixels depend only on (prompt, seed), so equal
/// requests give equal content addresses. Prompts containing any of
/// `reject_substrings` raise SafetyRejection.
///
/// File form: {"reject": ["..."], "side": 32}
class MockT2I final : public T2IBackend {
 public:
  explicit MockT2I(std::shared_ptr<ImageStore> store, std::vector<std::string> reject_substrings = {},
                   int side = 32);
  GeneratedImage generate(const T2IRequest& request) override;

  static std::shared_ptr<MockT2I> load(const std::filesystem::path& path,
                                       std::shared_ptr<ImageStore> store);

 private:
  std::shared_ptr<ImageStore> store_;
  const std::vector<std::string> reject_;
  const int side_;
};

/// Fixture probabilities keyed by (image address, question). An address of
/// "*" matches any image.
///
/// File form: {"probabilities": [{"image": "*", "question": "...", "prob": 0.9}]}
class MockVqa final : public VqaBackend {
 public:
  using Table = std::map<std::pair<std::string, std::string>, double>;

  explicit MockVqa(Table table, std::shared_ptr<ImageStore> store = nullptr);
  double probability(const std::string& image_address, const VqaItem& item) override;

  static std::shared_ptr<MockVqa> load(const std::filesystem::path& path,
                                       std::shared_ptr<ImageStore> store);

 private:
  const Table table_;
  std::shared_ptr<ImageStore> store_;
};

/// The synthetic PNG the mock generator produces for (prompt, seed).
std::string synthetic_png(const std::string& prompt, std::uint64_t seed, int side);

/// Encodes 8-bit RGB pixels (row-major, width*height*3 bytes) as PNG.
std::string encode_png_rgb(int width, int height, const std::vector<unsigned char>& rgb);

/// Wraps a chat backend and records every request it sees.
class RecordingChat final : public ChatBackend {
 public:
  explicit RecordingChat(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}
  std::string complete(const ChatRequest& request) override;
  std::vector<ChatRequest> requests() const;

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> requests_;
};

class RecordingT2I final : public T2IBackend {
 public:
  explicit RecordingT2I(std::shared_ptr<T2IBackend> inner) : inner_(std::move(inner)) {}
  GeneratedImage generate(const T2IRequest& request) override;
  std::vector<T2IRequest> requests() const;

 private:
  std::shared_ptr<T2IBackend> inner_;
  mutable std::mutex mu_;
  std::vector<T2IRequest> requests_;
};

}  // namespace midsmith

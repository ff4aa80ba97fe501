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

#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "midsmith/backends/http.hpp"
#include "midsmith/backends/image_store.hpp"
#include "midsmith/backends/mock.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "support.hpp"

using namespace midsmith;
using midsmith::testing::kind_of;
using nlohmann::json;

namespace {

// Minimal local server; handlers are swapped per test.
class Stub {
 public:
  Stub() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Stub() {
    server_.stop();
    thread_.join();
  }

  httplib::Server& server() { return server_; }

  BackendConfig config(const std::string& prefix = "") const {
    BackendConfig c;
    c.kind = BackendConfig::Kind::Http;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + prefix;
    c.timeout_ms = 2000;
    c.max_retries = 2;
    c.retry_backoff_ms = 1;
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ChatRequest one_turn(const std::string& text) {
  return {std::nullopt, {{Role::User, {ContentPart::text(text)}}}};
}

}  // namespace

TEST(HttpChat, PostsWireFormat) {
  Stub stub;
  json seen;
  std::string path;
  stub.server().Post(R"(/api/chat)", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    path = req.path;
    res.set_content(R"({"content": "hello back"})", "application/json");
  });
  auto store = std::make_shared<MemoryImageStore>();
  const auto addr = store->put("pixels");
  HttpChat chat(stub.config("/api/"), store);
  ChatRequest r = one_turn("look");
  r.system = "sys";
  r.messages[0].parts.push_back(ContentPart::image_ref(addr));
  EXPECT_EQ(chat.complete(r), "hello back");
  EXPECT_EQ(path, "/api/chat");
  EXPECT_EQ(seen["system"], "sys");
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["messages"][0]["parts"][1]["kind"], "image");
  EXPECT_EQ(seen["messages"][0]["parts"][1]["b64"], base64_encode("pixels"));
}

TEST(HttpChat, MissingImageFailsBeforeSending) {
  Stub stub;
  std::atomic<int> calls{0};
  stub.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content(R"({"content": "x"})", "application/json");
  });
  HttpChat chat(stub.config(), std::make_shared<MemoryImageStore>());
  ChatRequest r = one_turn("look");
  r.messages[0].parts.push_back(ContentPart::image_ref(sha256_hex("nope")));
  EXPECT_EQ(kind_of([&] { chat.complete(r); }), ErrorKind::ImageNotFound);
  EXPECT_EQ(calls.load(), 0);
}

TEST(HttpTransport, RetriesKeepRequestId) {
  Stub stub;
  std::mutex mu;
  std::vector<std::string> ids;
  stub.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    ids.push_back(req.get_header_value("x-request-id"));
    if (ids.size() < 3) {
      res.status = ids.size() == 1 ? 503 : 429;
      return;
    }
    res.set_content(R"({"content": "third time"})", "application/json");
  });
  HttpChat chat(stub.config(), nullptr);
  EXPECT_EQ(chat.complete(one_turn("x")), "third time");
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_FALSE(ids[0].empty());
  EXPECT_EQ(ids[0], ids[1]);
  EXPECT_EQ(ids[1], ids[2]);

  // A new logical call gets a new id.
  ids.clear();
  chat.complete(one_turn("y"));
  EXPECT_EQ(ids.size(), 3u);
}

TEST(HttpTransport, GivesUpAfterMaxRetries) {
  Stub stub;
  std::atomic<int> calls{0};
  stub.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  HttpChat chat(stub.config(), nullptr);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("x")); }), ErrorKind::BackendUnavailable);
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpTransport, StatusMapping) {
  Stub stub;
  std::atomic<int> calls{0};
  stub.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = json::parse(req.body);
    const auto text = body["messages"][0]["parts"][0]["text"].get<std::string>();
    if (text == "unsafe") res.status = 422;
    if (text == "bad") res.status = 400;
    if (text == "garbage") res.set_content("not json", "text/plain");
    if (text == "shape") res.set_content(R"({"text": "x"})", "application/json");
  });
  HttpChat chat(stub.config(), nullptr);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("unsafe")); }), ErrorKind::SafetyRejection);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("bad")); }), ErrorKind::BackendUnavailable);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("garbage")); }), ErrorKind::MalformedResponse);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("shape")); }), ErrorKind::MalformedResponse);
  // None of these are retried.
  EXPECT_EQ(calls.load(), 4);
}

TEST(HttpTransport, Timeout) {
  Stub stub;
  stub.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"content": "late"})", "application/json");
  });
  auto c = stub.config();
  c.timeout_ms = 100;
  c.max_retries = 0;
  HttpChat chat(c, nullptr);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("x")); }), ErrorKind::Timeout);
}

TEST(HttpTransport, ConnectionRefused) {
  // Bound but never listening, so connects are refused.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  BackendConfig c;
  c.kind = BackendConfig::Kind::Http;
  c.base_url = "http://127.0.0.1:" + std::to_string(port);
  c.max_retries = 1;
  c.retry_backoff_ms = 1;
  HttpChat chat(c, nullptr);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("x")); }), ErrorKind::BackendUnavailable);
  ::close(fd);
}

TEST(HttpTransport, BearerToken) {
  Stub stub;
  std::string auth;
  stub.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"content": "ok"})", "application/json");
  });
  ::setenv("MIDSMITH_TEST_TOKEN", "s3cret", 1);
  auto c = stub.config();
  c.auth_token_env = "MIDSMITH_TEST_TOKEN";
  HttpChat(c, nullptr).complete(one_turn("x"));
  EXPECT_EQ(auth, "Bearer s3cret");
  ::unsetenv("MIDSMITH_TEST_TOKEN");
  HttpChat(c, nullptr).complete(one_turn("x"));
  EXPECT_EQ(auth, "");
}

TEST(HttpT2I, StoresReturnedImage) {
  Stub stub;
  const std::string png = encode_png_rgb(1, 1, {10, 20, 30});
  json seen;
  stub.server().Post("/t2i", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(json{{"image_b64", base64_encode(png)}}.dump(), "application/json");
  });
  auto store = std::make_shared<MemoryImageStore>();
  HttpT2I t2i(stub.config(), store);
  const auto img = t2i.generate({"a fox", 42, 256, 128});
  EXPECT_EQ(seen["prompt"], "a fox");
  EXPECT_EQ(seen["seed"], 42);
  EXPECT_EQ(seen["width"], 256);
  EXPECT_EQ(seen["height"], 128);
  EXPECT_EQ(img.content_address, sha256_hex(png));
  EXPECT_EQ(img.bytes_len, png.size());
  EXPECT_EQ(img.mime, "image/png");
  EXPECT_EQ(*store->get(img.content_address), png);
}

TEST(HttpT2I, BadPayload) {
  Stub stub;
  stub.server().Post("/t2i", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"image_b64": "!!!"})", "application/json");
  });
  HttpT2I t2i(stub.config(), std::make_shared<MemoryImageStore>());
  EXPECT_EQ(kind_of([&] { t2i.generate({"a fox", 1, 64, 64}); }), ErrorKind::MalformedResponse);
}

TEST(HttpVqa, ProbabilityRange) {
  Stub stub;
  json seen;
  stub.server().Post("/vqa", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    const auto q = seen["question"].get<std::string>();
    res.set_content(q == "ok?" ? R"({"prob": 0.25})" : R"({"prob": 1.7})", "application/json");
  });
  auto store = std::make_shared<MemoryImageStore>();
  const auto addr = store->put("img");
  HttpVqa vqa(stub.config(), store);
  EXPECT_DOUBLE_EQ(vqa.probability(addr, {"ok?", "yes"}), 0.25);
  EXPECT_EQ(seen["answer"], "yes");
  EXPECT_EQ(seen["image_b64"], base64_encode("img"));
  EXPECT_EQ(kind_of([&] { vqa.probability(addr, {"bad?", "yes"}); }), ErrorKind::MalformedResponse);
}

TEST(HttpConfig, RejectsMissingScheme) {
  BackendConfig c;
  c.kind = BackendConfig::Kind::Http;
  c.base_url = "127.0.0.1:80";
  EXPECT_EQ(kind_of([&] { HttpChat(c, nullptr); }), ErrorKind::InvalidConfig);
}

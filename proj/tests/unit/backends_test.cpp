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

#include <fstream>

#include "midsmith/backends/backend.hpp"
#include "midsmith/backends/chat_request.hpp"
#include "midsmith/backends/image_store.hpp"
#include "midsmith/backends/mock.hpp"
#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "support.hpp"

using namespace midsmith;
using midsmith::testing::kind_of;
using midsmith::testing::TempDir;

namespace {

ChatRequest one_turn(const std::string& text) {
  return {std::nullopt, {{Role::User, {ContentPart::text(text)}}}};
}

}  // namespace

// --- chat requests ---------------------------------------------------------

TEST(ChatRequest, Validation) {
  EXPECT_NO_THROW(validate(one_turn("hi")));
  EXPECT_EQ(kind_of([] { validate(ChatRequest{}); }), ErrorKind::InvalidArgument);
  ChatRequest r = one_turn("a");
  r.messages.push_back({Role::Assistant, {ContentPart::text("b")}});
  EXPECT_EQ(kind_of([&] { validate(r); }), ErrorKind::InvalidArgument);
  r.messages.push_back({Role::Assistant, {ContentPart::text("c")}});
  EXPECT_EQ(kind_of([&] { validate(r); }), ErrorKind::InvalidArgument);
}

TEST(ChatRequest, JsonRoundTripAndDigest) {
  ChatRequest r;
  r.system = "sys";
  r.messages = {{Role::User, {ContentPart::text("look"), ContentPart::image_ref(std::string(64, 'a'))}},
                {Role::Assistant, {ContentPart::text("ok")}},
                {Role::User, {ContentPart::image_b64("AAAA"), ContentPart::text("and this")}}};
  const auto back = chat_request_from_json(nlohmann::json::parse(serialize(r)));
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize(back), serialize(r));
  EXPECT_EQ(request_digest(back), request_digest(r));
  EXPECT_EQ(r.messages[0].text(), "look");

  ChatRequest other = r;
  other.system = "sys2";
  EXPECT_NE(request_digest(other), request_digest(r));
}

// --- image stores ----------------------------------------------------------

TEST(ImageStore, MemoryIsContentAddressed) {
  MemoryImageStore s;
  const auto a = s.put("abc");
  EXPECT_EQ(a, sha256_hex("abc"));
  EXPECT_EQ(s.put("abc"), a);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(*s.get(a), "abc");
  EXPECT_FALSE(s.get(sha256_hex("zzz")));
}

TEST(ImageStore, FsReadsAssetsAndRejectsTampering) {
  TempDir dir;
  std::filesystem::create_directories(dir / "assets");
  const std::string bytes = "\x89PNG\r\n\x1a\nrest";
  const auto addr = sha256_hex(bytes);
  write_file(dir / "assets" / addr, bytes);

  FsImageStore s(dir / "store", {dir / "assets"});
  EXPECT_TRUE(s.contains(addr));
  EXPECT_EQ(*s.get(addr), bytes);

  const auto b = s.put("other bytes");
  EXPECT_TRUE(std::filesystem::exists(dir / "store" / b));
  write_file(dir / "store" / b, "tampered");
  EXPECT_FALSE(s.get(b));
  EXPECT_FALSE(s.get("../../etc/passwd"));
}

TEST(ImageStore, SniffMime) {
  EXPECT_EQ(sniff_mime(std::string("\x89PNG\r\n\x1a\n", 8)), "image/png");
  EXPECT_EQ(sniff_mime("\xFF\xD8\xFF\xE0"), "image/jpeg");
  EXPECT_EQ(sniff_mime("hello"), "application/octet-stream");
}

// --- mocks -----------------------------------------------------------------

TEST(MockChat, LookupOrder) {
  ChatScript s;
  const auto req = one_turn("q");
  s.on_digest(req, "by digest");
  s.on_last_user("q", "by text");
  s.on_last_user("r", "by text r");
  s.fail_on_last_user("boom", ErrorKind::BackendUnavailable);
  s.responder = [](const ChatRequest& r) -> std::optional<std::string> {
    if (r.messages.back().text() == "fallback") return "responder";
    return std::nullopt;
  };
  MockChat chat(s);
  EXPECT_EQ(chat.complete(req), "by digest");
  ChatRequest with_system = req;
  with_system.system = "x";
  EXPECT_EQ(chat.complete(with_system), "by text");
  EXPECT_EQ(chat.complete(one_turn("r")), "by text r");
  EXPECT_EQ(chat.complete(one_turn("fallback")), "responder");
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("boom")); }), ErrorKind::BackendUnavailable);
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("nothing")); }), ErrorKind::ScriptMiss);
}

TEST(MockChat, ScriptFile) {
  TempDir dir;
  write_file(dir / "s.json", R"({"responses": [
      {"last_user": "a", "response": "A"},
      {"last_user": "b", "error": "Timeout"}]})");
  MockChat chat(ChatScript::load(dir / "s.json"));
  EXPECT_EQ(chat.complete(one_turn("a")), "A");
  EXPECT_EQ(kind_of([&] { chat.complete(one_turn("b")); }), ErrorKind::Timeout);

  write_file(dir / "bad.json", R"({"responses": [{"last_user": "b", "error": "Nope"}]})");
  EXPECT_EQ(kind_of([&] { ChatScript::load(dir / "bad.json"); }), ErrorKind::InvalidConfig);
  write_file(dir / "bad2.json", R"({"responses": [{"response": "x"}]})");
  EXPECT_EQ(kind_of([&] { ChatScript::load(dir / "bad2.json"); }), ErrorKind::InvalidConfig);
}

TEST(MockT2I, DeterministicPng) {
  auto store = std::make_shared<MemoryImageStore>();
  MockT2I t2i(store, {"forbidden"});
  const auto a = t2i.generate({"a cat", 7, 512, 512});
  const auto b = t2i.generate({"a cat", 7, 512, 512});
  const auto c = t2i.generate({"a cat", 8, 512, 512});
  EXPECT_EQ(a, b);
  EXPECT_NE(a.content_address, c.content_address);
  EXPECT_EQ(a.mime, "image/png");
  const auto bytes = store->get(a.content_address);
  ASSERT_TRUE(bytes);
  EXPECT_EQ(bytes->size(), a.bytes_len);
  EXPECT_EQ(sniff_mime(*bytes), "image/png");
  EXPECT_EQ(*bytes, synthetic_png("a cat", 7, 32));

  EXPECT_EQ(kind_of([&] { t2i.generate({"a forbidden cat", 1, 512, 512}); }),
            ErrorKind::SafetyRejection);
  EXPECT_EQ(kind_of([&] { t2i.generate({"", 1, 512, 512}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { t2i.generate({"x", 1, 0, 512}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { t2i.generate({"x", 1, 512, kMaxImageSide + 1}); }),
            ErrorKind::InvalidArgument);
}

TEST(MockT2I, PngStructure) {
  const auto png = encode_png_rgb(2, 1, {255, 0, 0, 0, 255, 0});
  EXPECT_EQ(png.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
  EXPECT_NE(png.find("IHDR"), std::string::npos);
  EXPECT_NE(png.find("IDAT"), std::string::npos);
  EXPECT_EQ(png.substr(png.size() - 8, 4), "IEND");
}

TEST(MockVqa, TableLookup) {
  auto store = std::make_shared<MemoryImageStore>();
  const auto addr = store->put("img");
  MockVqa vqa({{{"*", "color?"}, 0.5}, {{addr, "color?"}, 0.9}}, store);
  EXPECT_DOUBLE_EQ(vqa.probability(addr, {"color?", "red"}), 0.9);
  const auto other = store->put("img2");
  EXPECT_DOUBLE_EQ(vqa.probability(other, {"color?", "red"}), 0.5);
  EXPECT_EQ(kind_of([&] { vqa.probability(other, {"size?", "big"}); }), ErrorKind::ScriptMiss);
  EXPECT_EQ(kind_of([&] { vqa.probability(sha256_hex("absent"), {"color?", "red"}); }),
            ErrorKind::ImageNotFound);
}

TEST(MockVqa, FileRejectsOutOfRange) {
  TempDir dir;
  write_file(dir / "v.json", R"({"probabilities": [{"image": "*", "question": "q", "prob": 1.5}]})");
  EXPECT_EQ(kind_of([&] { MockVqa::load(dir / "v.json", nullptr); }), ErrorKind::InvalidConfig);
}

TEST(Recording, CapturesRequests) {
  ChatScript s;
  s.on_last_user("x", "y");
  RecordingChat rec(std::make_shared<MockChat>(s));
  rec.complete(one_turn("x"));
  ASSERT_EQ(rec.requests().size(), 1u);
  EXPECT_EQ(rec.requests()[0], one_turn("x"));
}

// --- config ----------------------------------------------------------------

TEST(BackendConfig, JsonAndValidation) {
  BackendConfig c;
  c.kind = BackendConfig::Kind::Http;
  c.base_url = "http://127.0.0.1:9/api";
  c.auth_token_env = "TOKEN";
  c.max_retries = 5;
  EXPECT_EQ(backend_config_from_json(nlohmann::json(to_json(c))), c);

  EXPECT_EQ(kind_of([] { backend_config_from_json({{"kind", "http"}}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { backend_config_from_json({{"kind", "grpc"}}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { backend_config_from_json({{"timeout_ms", 0}}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { backend_config_from_json({{"max_retries", "x"}}); }),
            ErrorKind::InvalidConfig);
}

TEST(BackendConfig, FactoriesBuildMocks) {
  auto store = std::make_shared<MemoryImageStore>();
  BackendConfig c;
  c.script_file = midsmith::testing::fixture("scripts/vqa.json").string();
  EXPECT_TRUE(std::dynamic_pointer_cast<MockVqa>(make_vqa_backend(c, store)));
  c.script_file.reset();
  EXPECT_TRUE(std::dynamic_pointer_cast<MockT2I>(make_t2i_backend(c, store)));
}

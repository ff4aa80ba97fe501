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

#include "midsmith/backends/mock.hpp"

#include <zlib.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "midsmith/backends/image_store.hpp"
#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"

namespace midsmith {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "script " + path.string() + ": " + e.what());
  }
}

std::string resolve(const ChatScript::Entry& e, const std::string& key) {
  if (e.error) throw Error(*e.error, "scripted failure for " + key);
  return *e.response;
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

ChatScript& ChatScript::on_digest(const ChatRequest& request, std::string response) {
  by_digest[request_digest(request)] = Entry{std::move(response), std::nullopt};
  return *this;
}

ChatScript& ChatScript::on_last_user(std::string text, std::string response) {
  by_last_user[std::move(text)] = Entry{std::move(response), std::nullopt};
  return *this;
}

ChatScript& ChatScript::fail_on_last_user(std::string text, ErrorKind kind) {
  by_last_user[std::move(text)] = Entry{std::nullopt, kind};
  return *this;
}

ChatScript ChatScript::load(const std::filesystem::path& path) {
  const auto j = load_json(path);
  ChatScript script;
  for (const auto& e : j.at("responses")) {
    Entry entry;
    if (e.contains("response")) entry.response = e["response"].get<std::string>();
    if (e.contains("error")) {
      entry.error = parse_error_kind(e["error"].get<std::string>());
      if (!entry.error) {
        throw Error(ErrorKind::InvalidConfig, "unknown error kind in " + path.string());
      }
    }
    if (entry.response.has_value() == entry.error.has_value()) {
      throw Error(ErrorKind::InvalidConfig,
                  "script entry needs exactly one of response/error in " + path.string());
    }
    if (e.contains("digest")) {
      script.by_digest[e["digest"].get<std::string>()] = entry;
    } else if (e.contains("last_user")) {
      script.by_last_user[e["last_user"].get<std::string>()] = entry;
    } else {
      throw Error(ErrorKind::InvalidConfig, "script entry needs digest or last_user");
    }
  }
  return script;
}

std::string MockChat::complete(const ChatRequest& request) {
  validate(request);
  const auto digest = request_digest(request);
  if (auto it = script_.by_digest.find(digest); it != script_.by_digest.end()) {
    return resolve(it->second, digest);
  }
  const auto last = request.messages.back().text();
  if (auto it = script_.by_last_user.find(last); it != script_.by_last_user.end()) {
    return resolve(it->second, last);
  }
  if (script_.responder) {
    if (auto r = script_.responder(request)) return *r;
  }
  throw Error(ErrorKind::ScriptMiss, "no scripted response for request " + digest);
}

std::string encode_png_rgb(int width, int height, const std::vector<unsigned char>& rgb) {
  const auto row = static_cast<std::size_t>(width) * 3;
  std::string raw;
  raw.reserve((row + 1) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    raw.push_back('\0');  // filter: none
    raw.append(reinterpret_cast<const char*>(rgb.data()) + row * static_cast<std::size_t>(y), row);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &zlen,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_BEST_COMPRESSION) != Z_OK) {
    throw Error(ErrorKind::Io, "zlib compression failed");
  }
  z.resize(zlen);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB, no interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", {});
  return png;
}

std::string synthetic_png(const std::string& prompt, std::uint64_t seed, int side) {
  std::mt19937_64 rng(digest_u64(prompt + '\0' + std::to_string(seed)));
  // A smooth two-colour gradient plus a little noise; cheap and stable.
  const auto a = rng(), b = rng();
  std::vector<unsigned char> px(static_cast<std::size_t>(side) * side * 3);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int ca = static_cast<int>((a >> (8 * c)) & 0xff);
        const int cb = static_cast<int>((b >> (8 * c)) & 0xff);
        const int v = ca + (cb - ca) * (x + y) / (2 * side) + static_cast<int>(rng() % 8);
        px[(static_cast<std::size_t>(y) * side + x) * 3 + c] =
            static_cast<unsigned char>(std::clamp(v, 0, 255));
      }
    }
  }
  return encode_png_rgb(side, side, px);
}

MockT2I::MockT2I(std::shared_ptr<ImageStore> store, std::vector<std::string> reject_substrings,
                 int side)
    : store_(std::move(store)), reject_(std::move(reject_substrings)), side_(side) {
  if (!store_) throw Error(ErrorKind::InvalidConfig, "mock t2i needs an image store");
  if (side_ < 1 || side_ > kMaxImageSide) throw Error(ErrorKind::InvalidConfig, "bad mock side");
}

GeneratedImage MockT2I::generate(const T2IRequest& request) {
  validate(request);
  for (const auto& s : reject_) {
    if (request.prompt.find(s) != std::string::npos) {
      throw Error(ErrorKind::SafetyRejection, "prompt rejected");
    }
  }
  const auto png = synthetic_png(request.prompt, request.seed, side_);
  return {store_->put(png), png.size(), "image/png"};
}

std::shared_ptr<MockT2I> MockT2I::load(const std::filesystem::path& path,
                                       std::shared_ptr<ImageStore> store) {
  const auto j = load_json(path);
  std::vector<std::string> reject;
  if (j.contains("reject")) reject = j["reject"].get<std::vector<std::string>>();
  return std::make_shared<MockT2I>(std::move(store), std::move(reject), j.value("side", 32));
}

MockVqa::MockVqa(Table table, std::shared_ptr<ImageStore> store)
    : table_(std::move(table)), store_(std::move(store)) {
  for (const auto& [key, p] : table_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "fixture probability outside [0, 1]");
    }
  }
}

double MockVqa::probability(const std::string& image_address, const VqaItem& item) {
  if (store_ && !store_->contains(image_address)) {
    throw Error(ErrorKind::ImageNotFound, image_address);
  }
  if (auto it = table_.find({image_address, item.question}); it != table_.end()) return it->second;
  if (auto it = table_.find({"*", item.question}); it != table_.end()) return it->second;
  throw Error(ErrorKind::ScriptMiss, "no VQA fixture for (" + image_address + ", " +
                                         item.question + ")");
}

std::shared_ptr<MockVqa> MockVqa::load(const std::filesystem::path& path,
                                       std::shared_ptr<ImageStore> store) {
  const auto j = load_json(path);
  Table table;
  for (const auto& e : j.at("probabilities")) {
    table[{e.value("image", std::string("*")), e.at("question").get<std::string>()}] =
        e.at("prob").get<double>();
  }
  return std::make_shared<MockVqa>(std::move(table), std::move(store));
}

std::string RecordingChat::complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  return inner_->complete(request);
}

std::vector<ChatRequest> RecordingChat::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

GeneratedImage RecordingT2I::generate(const T2IRequest& request) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  return inner_->generate(request);
}

std::vector<T2IRequest> RecordingT2I::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

}  // namespace midsmith

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

#include "midsmith/backends/image_store.hpp"

#include <fstream>
#include <sstream>

#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/types.hpp"

namespace midsmith {

std::string MemoryImageStore::put(std::string_view bytes) {
  auto addr = sha256_hex(bytes);
  std::lock_guard lock(mu_);
  blobs_.try_emplace(addr, bytes);
  return addr;
}

std::optional<std::string> MemoryImageStore::get(std::string_view address) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(address);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

bool MemoryImageStore::contains(std::string_view address) const {
  std::lock_guard lock(mu_);
  return blobs_.find(address) != blobs_.end();
}

std::size_t MemoryImageStore::size() const {
  std::lock_guard lock(mu_);
  return blobs_.size();
}

FsImageStore::FsImageStore(std::filesystem::path root,
                           std::vector<std::filesystem::path> asset_dirs)
    : root_(std::move(root)), asset_dirs_(std::move(asset_dirs)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create image store " + root_.string());
}

std::string FsImageStore::put(std::string_view bytes) {
  auto addr = sha256_hex(bytes);
  const auto target = root_ / addr;
  if (std::filesystem::exists(target)) return addr;
  // Unique temp name per writer; rename is atomic on the same filesystem and
  // concurrent writers of one address write identical bytes.
  auto tmp = root_ / (addr + "." + new_uuid() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot store " + addr);
  }
  return addr;
}

std::optional<std::string> FsImageStore::get(std::string_view address) const {
  if (!is_content_address(address)) return std::nullopt;
  auto read_verified = [&](const std::filesystem::path& p) -> std::optional<std::string> {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    auto bytes = ss.str();
    if (sha256_hex(bytes) != address) return std::nullopt;
    return bytes;
  };
  if (auto b = read_verified(root_ / std::string(address))) return b;
  for (const auto& dir : asset_dirs_) {
    if (auto b = read_verified(dir / std::string(address))) return b;
  }
  return std::nullopt;
}

bool FsImageStore::contains(std::string_view address) const {
  if (!is_content_address(address)) return false;
  if (std::filesystem::exists(root_ / std::string(address))) return true;
  for (const auto& dir : asset_dirs_) {
    if (std::filesystem::exists(dir / std::string(address))) return true;
  }
  return false;
}

std::string sniff_mime(std::string_view bytes) {
  if (bytes.starts_with("\x89PNG\r\n\x1a\n")) return "image/png";
  if (bytes.starts_with("\xff\xd8\xff")) return "image/jpeg";
  if (bytes.starts_with("GIF8")) return "image/gif";
  if (bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WEBP") {
    return "image/webp";
  }
  return "application/octet-stream";
}

}  // namespace midsmith

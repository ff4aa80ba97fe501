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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace midsmith {

/// Blob storage keyed by the SHA-256 hex digest of the bytes. Implementations
/// are safe for concurrent use.
class ImageStore {
 public:
  virtual ~ImageStore() = default;

  /// Stores `bytes` (idempotent) and returns their content address.
  virtual std::string put(std::string_view bytes) = 0;
  virtual std::optional<std::string> get(std::string_view address) const = 0;
  virtual bool contains(std::string_view address) const { return get(address).has_value(); }
};

class MemoryImageStore final : public ImageStore {
 public:
  std::string put(std::string_view bytes) override;
  std::optional<std::string> get(std::string_view address) const override;
  bool contains(std::string_view address) const override;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> blobs_;
};

/// One file per blob, named by address, under `root`. Reads fall back to the
/// read-only `asset_dirs` (e.g. a dataset's image directory). Reads verify
/// the digest and treat a mismatching file as absent.
class FsImageStore final : public ImageStore {
 public:
  explicit FsImageStore(std::filesystem::path root,
                        std::vector<std::filesystem::path> asset_dirs = {});

  std::string put(std::string_view bytes) override;
  std::optional<std::string> get(std::string_view address) const override;
  bool contains(std::string_view address) const override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::filesystem::path> asset_dirs_;
};

/// Best-effort MIME sniffing from magic bytes.
std::string sniff_mime(std::string_view bytes);

}  // namespace midsmith

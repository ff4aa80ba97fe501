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
#include <string>
#include <string_view>

namespace midsmith {

/// Lowercase hex SHA-256 of `bytes`. This is the content address of a blob.
std::string sha256_hex(std::string_view bytes);

/// First 8 bytes of SHA-256(`text`), big-endian.
std::uint64_t digest_u64(std::string_view text);

std::string base64_encode(std::string_view bytes);
/// Throws Error(InvalidArgument) on malformed input.
std::string base64_decode(std::string_view text);

/// Random RFC 4122 version-4 UUID string.
std::string new_uuid();

}  // namespace midsmith

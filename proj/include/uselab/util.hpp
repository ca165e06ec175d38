// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace uselab {

// FNV-1a over arbitrary bytes; used for content digests and stream keying.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(uint64_t v);

// Digest of a vector<double>'s raw bytes, as 16 hex chars.
std::string digest_doubles(const std::vector<double>& v);
std::string digest_bytes(const std::vector<uint8_t>& v);
std::string digest_file(const std::string& path);

}  // namespace uselab

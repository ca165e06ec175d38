// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/util.hpp"

#include <cstdio>
#include <fstream>

#include "uselab/audio.hpp"

namespace uselab {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s, uint64_t seed) {
  return fnv1a64(s.data(), s.size(), seed);
}

std::string to_hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string digest_doubles(const std::vector<double>& v) {
  return to_hex(fnv1a64(v.data(), v.size() * sizeof(double)));
}

std::string digest_bytes(const std::vector<uint8_t>& v) {
  return to_hex(fnv1a64(v.data(), v.size()));
}

std::string digest_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for digest: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (f) {
    f.read(buf, sizeof(buf));
    const std::streamsize got = f.gcount();
    if (got > 0) h = fnv1a64(buf, static_cast<size_t>(got), h);
  }
  return to_hex(h);
}

}  // namespace uselab

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string_view>

namespace uselab {

// Counter-based deterministic RNG. A stream is keyed by (root_seed, item_id),
// so independent items can be processed on any number of workers in any order
// and still see identical draws. Output quality comes from the splitmix64
// finalizer applied at key + counter.
class RandomStream {
 public:
  RandomStream(uint64_t root_seed, std::string_view item_id);

  uint64_t next_u64();
  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  // Standard normal via Box-Muller; second value of each pair is cached.
  double gaussian();

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline RandomStream derive_stream(uint64_t root_seed, std::string_view id) {
  return RandomStream(root_seed, id);
}

}  // namespace uselab

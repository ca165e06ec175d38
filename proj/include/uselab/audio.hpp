// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uselab {

// Sampling rates the pipeline is tuned for. Other rates are accepted by the
// generic audio ops but trigger a warning hook.
inline constexpr std::array<int, 7> kSupportedRates = {8000,  16000, 22050,
                                                       24000, 32000, 44100,
                                                       48000};

bool is_supported_rate(int sample_rate);

// Warnings default to stderr; tests and embedders can capture them.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);
// Emits a warning if the rate is outside kSupportedRates.
void check_rate_supported(int sample_rate, const std::string& context);

// I/O failures (missing/unreadable/unwritable files). Kept distinct from
// std::invalid_argument so the CLI can map them to a different exit code.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Mono float64 signal plus its sampling rate.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  AudioBuffer() = default;
  AudioBuffer(std::vector<double> s, int fs)
      : samples(std::move(s)), sample_rate(fs) {}

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
  // Sum of squared samples.
  double energy() const;
  double peak_abs() const;

  // Throws std::invalid_argument on NaN/Inf samples or fs <= 0.
  void validate(const std::string& context = "audio buffer") const;
};

}  // namespace uselab

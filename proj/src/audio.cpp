// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/audio.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

namespace uselab {

namespace {
std::mutex g_warn_mu;
std::function<void(const std::string&)> g_warn_handler;
}  // namespace

bool is_supported_rate(int sample_rate) {
  return std::find(kSupportedRates.begin(), kSupportedRates.end(),
                   sample_rate) != kSupportedRates.end();
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(g_warn_mu);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mu);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

void check_rate_supported(int sample_rate, const std::string& context) {
  if (!is_supported_rate(sample_rate)) {
    warn(context + ": nonstandard sample rate " + std::to_string(sample_rate));
  }
}

double AudioBuffer::energy() const {
  double e = 0.0;
  for (double v : samples) e += v * v;
  return e;
}

double AudioBuffer::peak_abs() const {
  double p = 0.0;
  for (double v : samples) p = std::max(p, std::abs(v));
  return p;
}

void AudioBuffer::validate(const std::string& context) const {
  if (sample_rate <= 0) {
    throw std::invalid_argument(context + ": sample rate must be positive");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(context + ": non-finite sample");
    }
  }
}

}  // namespace uselab

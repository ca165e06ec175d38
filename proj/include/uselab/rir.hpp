// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "uselab/audio.hpp"

namespace uselab::rir {

// Split of an impulse response around its direct-path peak:
//   r[n] == pre_peak ++ gain * (early ++ late)   starting at direct_index,
// with early peak-normalized so early[0] == 1.
struct Decomposition {
  size_t direct_index = 0;  // sample offset of the strongest tap
  double gain = 0.0;        // signed value of that tap
  std::vector<double> early;
  std::vector<double> late;
  std::vector<double> pre_peak;  // raw samples before the peak, unscaled
  double early_window_ms = 0.0;
  int sample_rate = 0;
  size_t rir_length = 0;

  // Rebuilds the original response from the parts.
  std::vector<double> reconstruct() const;
  nlohmann::json to_json() const;
};

enum class TargetKind { kAnechoic, kShiftedAnechoic, kEarlyReflected };

struct TargetSpec {
  TargetKind kind = TargetKind::kShiftedAnechoic;
  double window_ms = 50.0;  // only used by kEarlyReflected

  // Accepts "anechoic", "shifted_anechoic", "early_reflected" or
  // "early_reflected:<ms>".
  static TargetSpec parse(const std::string& text);
  std::string to_string() const;
};

// Index of the maximum-magnitude tap (first one on ties).
size_t estimate_direct_path(const AudioBuffer& rir);

// Splits `rir` at its direct-path peak; `early` covers early_window_ms after
// (and including) the peak. Throws on empty/all-zero responses.
Decomposition decompose(const AudioBuffer& rir, double early_window_ms = 50.0);

// Convolves speech with the full response, trimmed to the input length.
AudioBuffer render_reverberant(const AudioBuffer& speech,
                               const AudioBuffer& rir);

// Builds the training target aligned with render_reverberant output:
//  - anechoic: the dry input unchanged,
//  - shifted_anechoic: dry input delayed by the direct-path lag,
//  - early_reflected: delayed input convolved with the leading window_ms of
//    the normalized response (0 ms degenerates to shifted_anechoic).
// Output length always equals the input length.
AudioBuffer make_target(const AudioBuffer& speech, const Decomposition& dec,
                        const TargetSpec& spec);

}  // namespace uselab::rir

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "uselab/audio.hpp"

namespace uselab::sfi {

// Rate-scaled analysis geometry: the window spans 40 ms at every rate
// (320 samples at 8 kHz), hop is half a window, so frame counts and bin
// spacing (25 Hz) are identical across rates for equal-duration signals.
struct SfiParams {
  int sample_rate = 0;
  size_t win_len = 0;
  size_t hop_len = 0;
  size_t n_bins = 0;

  static SfiParams for_rate(int sample_rate);
  bool operator==(const SfiParams&) const = default;
};

// Complex spectrogram, frames x bins, row-major.
struct FrameGrid {
  SfiParams params;
  size_t n_frames = 0;
  size_t original_length = 0;  // sample count the grid was computed from
  std::vector<std::complex<double>> data;

  std::complex<double>& at(size_t frame, size_t bin) {
    return data[frame * params.n_bins + bin];
  }
  const std::complex<double>& at(size_t frame, size_t bin) const {
    return data[frame * params.n_bins + bin];
  }
  void validate() const;
};

// Forward transform with sqrt-Hann analysis window and half-window
// reflection padding. Requires len(signal) >= win_len.
FrameGrid stft(const AudioBuffer& signal);

// Overlap-add inverse with sqrt-Hann synthesis window; reconstructs the
// original samples (length original_length).
AudioBuffer istft(const FrameGrid& grid);

// Contiguous bin ranges covering [0, Nyquist]: full band_width_hz chunks
// plus a remainder band.
struct Band {
  size_t lo_bin = 0;   // inclusive
  size_t hi_bin = 0;   // inclusive
  double lo_hz = 0.0;  // nominal edges
  double hi_hz = 0.0;
};

struct BandPartition {
  int sample_rate = 0;
  double band_width_hz = 0.0;
  std::vector<Band> bands;
};

BandPartition band_partition(int sample_rate, double band_width_hz = 4000.0);

// Binary grid interchange (complex float32 payload, self-describing header).
void save_grid(const FrameGrid& grid, const std::string& path);
FrameGrid load_grid(const std::string& path);

}  // namespace uselab::sfi

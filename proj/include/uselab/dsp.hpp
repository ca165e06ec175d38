// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

#include "uselab/audio.hpp"

namespace uselab {

enum class ConvolveMode { kFull, kTrimToSignal };

// Linear convolution with float64 accumulation. Short kernels run in the
// time domain; long ones go through FFT overlap-add. kFull returns
// N + M - 1 samples, kTrimToSignal the first N.
std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel,
                             ConvolveMode mode = ConvolveMode::kFull);

// Polyphase-style windowed-sinc resampler (Kaiser beta 8.6, 64-tap support
// per output sample at the lower of the two rates, cutoff at 0.95 of the
// narrower Nyquist). Output length is round(n * target_fs / fs).
AudioBuffer resample(const AudioBuffer& in, int target_fs);

// Odd-length linear-phase Kaiser lowpass taps: cutoff_hz at sample_rate,
// length ~dur_ms worth of samples rounded up to odd.
std::vector<double> design_lowpass(double cutoff_hz, int sample_rate,
                                   double dur_ms, double beta = 8.6);

// Modified Bessel function of the first kind, order zero.
double bessel_i0(double x);

}  // namespace uselab

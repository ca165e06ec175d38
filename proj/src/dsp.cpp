// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

#include "uselab/fft.hpp"

namespace uselab {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Direct time-domain convolution; exact for tiny kernels (a length-1 unit
// kernel reproduces the signal bitwise).
std::vector<double> convolve_direct(const std::vector<double>& s,
                                    const std::vector<double>& h) {
  std::vector<double> out(s.size() + h.size() - 1, 0.0);
  if (h.size() == 1) {
    const double g = h[0];
    for (size_t n = 0; n < s.size(); ++n) out[n] = s[n] * g;
    return out;
  }
  for (size_t k = 0; k < h.size(); ++k) {
    const double hk = h[k];
    if (hk == 0.0) continue;
    for (size_t n = 0; n < s.size(); ++n) out[n + k] += s[n] * hk;
  }
  return out;
}

std::vector<double> convolve_fft_ola(const std::vector<double>& s,
                                     const std::vector<double>& h) {
  const size_t n = s.size(), m = h.size();
  const size_t full = n + m - 1;
  // Block length: big enough that each block amortizes the kernel tail.
  const size_t fft_len = fft::next_pow2(std::max<size_t>(2 * m, 8192));
  const size_t block = fft_len - m + 1;

  std::vector<double> padded_h(fft_len, 0.0);
  std::copy(h.begin(), h.end(), padded_h.begin());
  const auto kh = fft::rfft(padded_h);

  std::vector<double> out(full, 0.0);
  std::vector<double> seg(fft_len, 0.0);
  std::vector<std::complex<double>> spec;
  for (size_t start = 0; start < n; start += block) {
    const size_t len = std::min(block, n - start);
    std::fill(seg.begin(), seg.end(), 0.0);
    std::copy(s.begin() + start, s.begin() + start + len, seg.begin());
    spec = fft::rfft(seg);
    for (size_t i = 0; i < spec.size(); ++i) spec[i] *= kh[i];
    const auto piece = fft::irfft(spec, fft_len);
    const size_t copy_len = std::min(len + m - 1, full - start);
    for (size_t i = 0; i < copy_len; ++i) out[start + i] += piece[i];
  }
  return out;
}

}  // namespace

double bessel_i0(double x) {
  // Power series; converges quickly for the beta values used here.
  const double q = x * x / 4.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 128; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel,
                             ConvolveMode mode) {
  if (signal.empty() || kernel.empty()) {
    throw std::invalid_argument("convolve: empty signal or kernel");
  }
  std::vector<double> out;
  if (std::min(signal.size(), kernel.size()) <= 64) {
    out = convolve_direct(signal, kernel);
  } else {
    out = convolve_fft_ola(signal, kernel);
  }
  if (mode == ConvolveMode::kTrimToSignal) out.resize(signal.size());
  return out;
}

std::vector<double> design_lowpass(double cutoff_hz, int sample_rate,
                                   double dur_ms, double beta) {
  if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate / 2.0) {
    throw std::invalid_argument("design_lowpass: cutoff outside (0, Nyquist)");
  }
  size_t len =
      static_cast<size_t>(std::ceil(dur_ms * sample_rate / 1000.0));
  if (len % 2 == 0) ++len;
  if (len < 3) len = 3;
  const double mid = static_cast<double>(len / 2);
  const double fc = cutoff_hz / sample_rate;  // cycles per sample
  const double i0b = bessel_i0(beta);
  std::vector<double> h(len);
  for (size_t i = 0; i < len; ++i) {
    const double d = static_cast<double>(i) - mid;
    const double u = d / mid;
    const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
    h[i] = 2.0 * fc * sinc(2.0 * fc * d) * w;
  }
  return h;
}

AudioBuffer resample(const AudioBuffer& in, int target_fs) {
  in.validate("resample");
  if (target_fs <= 0) {
    throw std::invalid_argument("resample: target rate must be positive");
  }
  check_rate_supported(target_fs, "resample");
  if (target_fs == in.sample_rate) return in;
  if (in.empty()) return AudioBuffer({}, target_fs);

  const int fs = in.sample_rate;
  const double ratio = static_cast<double>(target_fs) / fs;
  const double scale = std::min(1.0, ratio);  // anti-alias shrink on downsample
  const double fc = 0.475 * scale;            // 0.95 * narrower Nyquist
  const double half = 32.0 / scale;           // 64-tap support at reduced rate
  constexpr double kBeta = 8.6;
  const double i0b = bessel_i0(kBeta);

  const size_t n = in.size();
  const size_t out_len = static_cast<size_t>(
      std::llround(static_cast<double>(n) * target_fs / fs));
  std::vector<double> out(out_len, 0.0);

  for (size_t i = 0; i < out_len; ++i) {
    // Exact rational center keeps positioning deterministic.
    const int64_t num = static_cast<int64_t>(i) * fs;
    const int64_t ip = num / target_fs;
    const double frac = static_cast<double>(num % target_fs) / target_fs;
    const double center = static_cast<double>(ip) + frac;

    const int64_t j0 = std::max<int64_t>(
        0, static_cast<int64_t>(std::ceil(center - half)));
    const int64_t j1 = std::min<int64_t>(
        static_cast<int64_t>(n) - 1,
        static_cast<int64_t>(std::floor(center + half)));
    double acc = 0.0;
    for (int64_t j = j0; j <= j1; ++j) {
      const double d = static_cast<double>(j) - center;
      const double u = d * scale / 32.0;
      const double w =
          bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
      acc += in.samples[static_cast<size_t>(j)] * 2.0 * fc * sinc(2.0 * fc * d) * w;
    }
    out[i] = acc;
  }
  return AudioBuffer(std::move(out), target_fs);
}

}  // namespace uselab

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/metrics.hpp"

#include <cmath>
#include <vector>

#include "uselab/sfi_stft.hpp"

namespace uselab::metrics {

namespace {

constexpr double kSdrCapDb = 100.0;
constexpr double kSpecFloor = 1e-10;
constexpr int kMelFilters = 23;
constexpr int kCepstra = 13;  // c1..c13

void check_pair(const AudioBuffer& a, const AudioBuffer& b,
                const char* what) {
  a.validate(what);
  b.validate(what);
  if (a.sample_rate != b.sample_rate) {
    throw std::invalid_argument(std::string(what) + ": sample rate mismatch");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank evaluated at the grid bin centers.
std::vector<std::vector<double>> mel_bank(int fs, size_t n_bins,
                                          size_t win_len) {
  const double nyq = fs / 2.0;
  const double mel_max = hz_to_mel(nyq);
  std::vector<double> centers(kMelFilters + 2);
  for (int m = 0; m < kMelFilters + 2; ++m) {
    centers[m] = mel_to_hz(mel_max * m / (kMelFilters + 1));
  }
  std::vector<std::vector<double>> bank(
      kMelFilters, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < kMelFilters; ++m) {
    const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (size_t b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * fs / win_len;
      if (f <= lo || f >= hi) continue;
      bank[m][b] = f < mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
  return bank;
}

// c1..c13 of the DCT-II of the log mel energies for one frame.
std::vector<double> frame_cepstrum(
    const std::vector<double>& log_mel) {
  std::vector<double> c(kCepstra);
  const int m_count = static_cast<int>(log_mel.size());
  for (int k = 1; k <= kCepstra; ++k) {
    double acc = 0.0;
    for (int m = 0; m < m_count; ++m) {
      acc += log_mel[m] * std::cos(M_PI * k * (m + 0.5) / m_count);
    }
    c[k - 1] = acc;
  }
  return c;
}

}  // namespace

double sdr_db(const AudioBuffer& reference, const AudioBuffer& estimate) {
  check_pair(reference, estimate, "sdr");
  double ref_e = 0.0, res_e = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double r = reference.samples[i];
    const double d = r - estimate.samples[i];
    ref_e += r * r;
    res_e += d * d;
  }
  if (ref_e == 0.0) throw std::invalid_argument("sdr: silent reference");
  if (res_e <= 1e-20 * ref_e) return kSdrCapDb;
  return std::min(kSdrCapDb, 10.0 * std::log10(ref_e / res_e));
}

double lsd_db(const AudioBuffer& reference, const AudioBuffer& estimate) {
  check_pair(reference, estimate, "lsd");
  const auto gr = sfi::stft(reference);
  const auto ge = sfi::stft(estimate);
  const size_t frames = gr.n_frames, bins = gr.params.n_bins;
  double total = 0.0;
  for (size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (size_t b = 0; b < bins; ++b) {
      const double pr = std::norm(gr.at(f, b)) + kSpecFloor;
      const double pe = std::norm(ge.at(f, b)) + kSpecFloor;
      const double d = 10.0 * std::log10(pr / pe);
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(bins));
  }
  return total / static_cast<double>(frames);
}

double mcd(const AudioBuffer& reference, const AudioBuffer& estimate) {
  check_pair(reference, estimate, "mcd");
  const auto gr = sfi::stft(reference);
  const auto ge = sfi::stft(estimate);
  const size_t frames = gr.n_frames, bins = gr.params.n_bins;
  const auto bank = mel_bank(reference.sample_rate, bins, gr.params.win_len);

  double total = 0.0;
  std::vector<double> lr(kMelFilters), le(kMelFilters);
  for (size_t f = 0; f < frames; ++f) {
    for (int m = 0; m < kMelFilters; ++m) {
      double er = 0.0, ee = 0.0;
      for (size_t b = 0; b < bins; ++b) {
        const double w = bank[m][b];
        if (w == 0.0) continue;
        er += w * std::norm(gr.at(f, b));
        ee += w * std::norm(ge.at(f, b));
      }
      lr[m] = std::log(std::max(er, kSpecFloor));
      le[m] = std::log(std::max(ee, kSpecFloor));
    }
    const auto cr = frame_cepstrum(lr);
    const auto ce = frame_cepstrum(le);
    double acc = 0.0;
    for (int k = 0; k < kCepstra; ++k) {
      const double d = cr[k] - ce[k];
      acc += d * d;
    }
    total += std::sqrt(acc);
  }
  const double factor = 10.0 * std::sqrt(2.0) / std::log(10.0);
  return factor * total / static_cast<double>(frames);
}

nlohmann::json evaluate(const AudioBuffer& reference,
                        const AudioBuffer& estimate) {
  return nlohmann::json{{"sdr_db", sdr_db(reference, estimate)},
                        {"lsd_db", lsd_db(reference, estimate)},
                        {"mcd", mcd(reference, estimate)}};
}

}  // namespace uselab::metrics

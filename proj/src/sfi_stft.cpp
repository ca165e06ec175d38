// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/sfi_stft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "uselab/fft.hpp"

namespace uselab::sfi {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'G', '1'};

std::vector<double> sqrt_hann(size_t win) {
  std::vector<double> w(win);
  for (size_t i = 0; i < win; ++i) {
    const double h = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win);
    w[i] = std::sqrt(std::max(0.0, h));
  }
  return w;
}

// Mirror an out-of-range index back into [0, n) without repeating the edge.
size_t reflect_index(long long idx, size_t n) {
  const long long m = static_cast<long long>(n);
  while (idx < 0 || idx >= m) {
    if (idx < 0) idx = -idx;
    if (idx >= m) idx = 2 * m - 2 - idx;
  }
  return static_cast<size_t>(idx);
}

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const std::string& path) {
  T v{};
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::invalid_argument("truncated grid file: " + path);
  }
  return v;
}

}  // namespace

SfiParams SfiParams::for_rate(int sample_rate) {
  if (sample_rate <= 0) {
    throw std::invalid_argument("sfi params: sample rate must be positive");
  }
  // win = 320 * fs / 8000 must be an even integer so hop = win / 2 is whole.
  if ((320LL * sample_rate) % 8000 != 0 || (sample_rate / 25) % 2 != 0) {
    throw std::invalid_argument(
        "sfi params: unsupported rate " + std::to_string(sample_rate) +
        " (40 ms window is not an even sample count)");
  }
  SfiParams p;
  p.sample_rate = sample_rate;
  p.win_len = static_cast<size_t>(320LL * sample_rate / 8000);
  p.hop_len = p.win_len / 2;
  p.n_bins = p.win_len / 2 + 1;
  return p;
}

void FrameGrid::validate() const {
  if (params.win_len == 0 || params.hop_len != params.win_len / 2 ||
      params.n_bins != params.win_len / 2 + 1) {
    throw std::invalid_argument("frame grid: inconsistent params");
  }
  if (data.size() != n_frames * params.n_bins) {
    throw std::invalid_argument("frame grid: data size mismatch");
  }
}

FrameGrid stft(const AudioBuffer& signal) {
  signal.validate("stft");
  const SfiParams p = SfiParams::for_rate(signal.sample_rate);
  const size_t n = signal.size();
  if (n < p.win_len) {
    throw std::invalid_argument("stft: signal shorter than one window");
  }

  const size_t pad = p.win_len / 2;
  const size_t frames = (n + p.hop_len - 1) / p.hop_len + 1;
  const size_t padded_len = (frames - 1) * p.hop_len + p.win_len;

  std::vector<double> padded(padded_len);
  for (size_t i = 0; i < padded_len; ++i) {
    padded[i] =
        signal.samples[reflect_index(static_cast<long long>(i) -
                                         static_cast<long long>(pad),
                                     n)];
  }

  const auto w = sqrt_hann(p.win_len);
  FrameGrid grid;
  grid.params = p;
  grid.n_frames = frames;
  grid.original_length = n;
  grid.data.resize(frames * p.n_bins);

  std::vector<double> buf(p.win_len);
  for (size_t f = 0; f < frames; ++f) {
    const size_t off = f * p.hop_len;
    for (size_t j = 0; j < p.win_len; ++j) buf[j] = padded[off + j] * w[j];
    const auto spec = fft::rfft(buf);
    std::copy(spec.begin(), spec.end(), grid.data.begin() + f * p.n_bins);
  }
  return grid;
}

AudioBuffer istft(const FrameGrid& grid) {
  grid.validate();
  const SfiParams& p = grid.params;
  if (grid.n_frames == 0) {
    throw std::invalid_argument("istft: empty grid");
  }
  const size_t pad = p.win_len / 2;
  const size_t padded_len = (grid.n_frames - 1) * p.hop_len + p.win_len;
  if (grid.original_length + pad > padded_len) {
    throw std::invalid_argument(
        "istft: original_length inconsistent with frame count");
  }

  const auto w = sqrt_hann(p.win_len);
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wsum(padded_len, 0.0);
  for (size_t f = 0; f < grid.n_frames; ++f) {
    const auto frame =
        fft::irfft(grid.data.data() + f * p.n_bins, p.win_len);
    const size_t off = f * p.hop_len;
    for (size_t j = 0; j < p.win_len; ++j) {
      acc[off + j] += frame[j] * w[j];
      wsum[off + j] += w[j] * w[j];
    }
  }

  AudioBuffer out;
  out.sample_rate = p.sample_rate;
  out.samples.resize(grid.original_length);
  for (size_t i = 0; i < grid.original_length; ++i) {
    const double den = wsum[pad + i];
    out.samples[i] = den > 1e-12 ? acc[pad + i] / den : 0.0;
  }
  return out;
}

BandPartition band_partition(int sample_rate, double band_width_hz) {
  const SfiParams p = SfiParams::for_rate(sample_rate);
  if (band_width_hz <= 0.0) {
    throw std::invalid_argument("band partition: width must be positive");
  }
  const double nyquist = sample_rate / 2.0;
  const double spacing =
      static_cast<double>(sample_rate) / static_cast<double>(p.win_len);

  BandPartition part;
  part.sample_rate = sample_rate;
  part.band_width_hz = band_width_hz;

  const size_t n_full = static_cast<size_t>(nyquist / band_width_hz);
  const bool has_remainder = n_full * band_width_hz < nyquist;
  const size_t n_bands = std::max<size_t>(1, n_full + (has_remainder ? 1 : 0));

  size_t next_lo = 0;
  for (size_t k = 0; k < n_bands; ++k) {
    Band b;
    b.lo_bin = next_lo;
    b.lo_hz = static_cast<double>(k) * band_width_hz;
    if (k + 1 == n_bands) {
      b.hi_bin = p.n_bins - 1;
      b.hi_hz = nyquist;
    } else {
      const double edge = static_cast<double>(k + 1) * band_width_hz;
      // Last bin strictly below the next edge.
      b.hi_bin = static_cast<size_t>(std::ceil(edge / spacing)) - 1;
      b.hi_hz = edge;
    }
    if (b.hi_bin < b.lo_bin || b.hi_bin >= p.n_bins) {
      throw std::invalid_argument(
          "band partition: width too small for bin spacing");
    }
    part.bands.push_back(b);
    next_lo = b.hi_bin + 1;
  }
  return part;
}

void save_grid(const FrameGrid& grid, const std::string& path) {
  grid.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open grid file for writing: " + path);
  f.write(kMagic, 4);
  write_pod<uint32_t>(f, static_cast<uint32_t>(grid.params.sample_rate));
  write_pod<uint32_t>(f, static_cast<uint32_t>(grid.params.win_len));
  write_pod<uint32_t>(f, static_cast<uint32_t>(grid.params.hop_len));
  write_pod<uint32_t>(f, static_cast<uint32_t>(grid.params.n_bins));
  write_pod<uint64_t>(f, static_cast<uint64_t>(grid.n_frames));
  write_pod<uint64_t>(f, static_cast<uint64_t>(grid.original_length));
  for (const auto& c : grid.data) {
    write_pod<float>(f, static_cast<float>(c.real()));
    write_pod<float>(f, static_cast<float>(c.imag()));
  }
  if (!f) throw IoError("failed to write grid file: " + path);
}

FrameGrid load_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open grid file: " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::invalid_argument("bad grid file magic: " + path);
  }
  FrameGrid grid;
  grid.params.sample_rate = static_cast<int>(read_pod<uint32_t>(f, path));
  grid.params.win_len = read_pod<uint32_t>(f, path);
  grid.params.hop_len = read_pod<uint32_t>(f, path);
  grid.params.n_bins = read_pod<uint32_t>(f, path);
  grid.n_frames = read_pod<uint64_t>(f, path);
  grid.original_length = read_pod<uint64_t>(f, path);

  const SfiParams expect = SfiParams::for_rate(grid.params.sample_rate);
  if (!(grid.params == expect)) {
    throw std::invalid_argument("grid params do not match its sample rate: " +
                                path);
  }
  grid.data.resize(grid.n_frames * grid.params.n_bins);
  for (auto& c : grid.data) {
    const float re = read_pod<float>(f, path);
    const float im = read_pod<float>(f, path);
    c = {static_cast<double>(re), static_cast<double>(im)};
  }
  return grid;
}

}  // namespace uselab::sfi

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace uselab::fft {

namespace {

// Plans are created once per length and reused; creation is serialized
// because the FFTW planner is not thread-safe. FFTW_UNALIGNED lets the
// new-array execute functions run on arbitrary buffers.
class PlanCache {
 public:
  fftw_plan forward(size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fwd_.find(n);
    if (it != fwd_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                       out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw r2c plan failed");
    fwd_[n] = p;
    return p;
  }

  fftw_plan inverse(size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = inv_.find(n);
    if (it != inv_.end()) return it->second;
    std::vector<fftw_complex> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n), in.data(),
                                       out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw c2r plan failed");
    inv_[n] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::unordered_map<size_t, fftw_plan> fwd_;
  std::unordered_map<size_t, fftw_plan> inv_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

std::vector<std::complex<double>> rfft(const double* in, size_t n) {
  if (n == 0) throw std::invalid_argument("rfft: empty input");
  std::vector<std::complex<double>> out(n / 2 + 1);
  // The r2c transform does not modify its input; FFTW's API just lacks const.
  fftw_execute_dft_r2c(cache().forward(n), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& in) {
  return rfft(in.data(), in.size());
}

std::vector<double> irfft(const std::complex<double>* in, size_t n) {
  if (n == 0) throw std::invalid_argument("irfft: empty output length");
  // c2r destroys its input, so work on a copy.
  std::vector<std::complex<double>> tmp(in, in + n / 2 + 1);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(cache().inverse(n),
                       reinterpret_cast<fftw_complex*>(tmp.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& in,
                          size_t n) {
  if (in.size() != n / 2 + 1) {
    throw std::invalid_argument("irfft: bin count does not match length");
  }
  return irfft(in.data(), n);
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace uselab::fft

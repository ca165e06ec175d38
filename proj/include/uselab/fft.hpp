// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace uselab::fft {

// Real-to-complex transform of length n; returns n/2 + 1 bins, unnormalized.
std::vector<std::complex<double>> rfft(const double* in, size_t n);
std::vector<std::complex<double>> rfft(const std::vector<double>& in);

// Inverse of rfft back to n real samples, scaled by 1/n so irfft(rfft(x)) == x
// up to rounding.
std::vector<double> irfft(const std::complex<double>* in, size_t n);
std::vector<double> irfft(const std::vector<std::complex<double>>& in,
                          size_t n);

size_t next_pow2(size_t n);

}  // namespace uselab::fft

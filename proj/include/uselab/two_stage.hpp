// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "uselab/sfi_stft.hpp"

namespace uselab::twostage {

// Dense row-major matrix, just enough linear algebra for the checks here.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;  // rows * cols

  static Matrix zeros(size_t rows, size_t cols);
  static Matrix identity(size_t n);
  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double at(size_t r, size_t c) const { return a[r * cols + c]; }
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transposed(const std::vector<double>& x) const;
};

enum class Activation { kIdentity, kLeakyRelu };

struct Layer {
  Matrix weight;
  Activation act = Activation::kIdentity;
  double leaky_slope = 0.2;     // must be <= 1 so the activation is 1-Lipschitz
  double norm_estimate = 0.0;   // recorded spectral norm of `weight`
};

struct LayerStack {
  std::vector<Layer> layers;

  void validate() const;  // shape chain + slope bounds
  size_t input_width() const;
  // Post-activation outputs of every layer.
  std::vector<std::vector<double>> forward(const std::vector<double>& x) const;
};

// Largest singular value by power iteration (deterministic seeded start,
// early exit on convergence). Zero matrices return 0.
double spectral_norm_estimate(const Matrix& m, size_t max_iters = 500);

// Divides every weight by its spectral norm and records the re-estimated
// norm of the result (~1). Throws on zero-norm weights.
LayerStack spectral_normalize(const LayerStack& stack, size_t max_iters = 500);

// Feature-distance bound: for each layer, || D_l(a) - D_l(b) || must not
// exceed (product of recorded norms up to l) * || a - b ||.
struct LipschitzReport {
  std::vector<double> lhs;    // per-layer feature distance
  std::vector<double> rhs;    // per-layer bound
  std::vector<double> slack;  // rhs - lhs
  double min_slack = 0.0;
  double lipschitz_bound = 0.0;  // product over all layers
  nlohmann::json to_json() const;
};

LipschitzReport lipschitz_check(const LayerStack& stack,
                                const std::vector<double>& a,
                                const std::vector<double>& b);

// Stage one: per-bin Wiener-style magnitude regression against a noise PSD
// (one value per bin). An all-zero PSD is an exact no-op.
sfi::FrameGrid oracle_regression(const sfi::FrameGrid& noisy,
                                 const std::vector<double>& noise_psd);

// Stage two: per-bin quantile tables of reference magnitudes.
struct TransportCorrector {
  sfi::SfiParams params;
  size_t n_quantiles = 0;
  // bins x n_quantiles, each row ascending
  std::vector<std::vector<double>> tables;

  // Interpolated reference magnitude at rank u in (0, 1).
  double lookup(size_t bin, double u) const;
  void save(const std::string& path) const;
  static TransportCorrector load(const std::string& path);
};

TransportCorrector fit_corrector(
    const std::vector<const sfi::FrameGrid*>& reference_grids,
    size_t n_quantiles = 256);

struct CorrectionResult {
  sfi::FrameGrid final;       // regressed + correction
  sfi::FrameGrid correction;  // what stage two added
};

// Rank-remaps each bin's magnitudes onto the corrector's reference quantiles
// (phases untouched) and returns the result as a residual pair satisfying
// final == regressed + correction exactly, component by component.
CorrectionResult transport_correct(const sfi::FrameGrid& regressed,
                                   const TransportCorrector& corrector);

// True iff regressed + correction reproduces final bit-exactly everywhere.
bool residual_identity_holds(const sfi::FrameGrid& final,
                             const sfi::FrameGrid& correction,
                             const sfi::FrameGrid& regressed);

// Pearson correlation between the magnitude residuals (clean - regressed)
// and (final - regressed), flattened over all cells. Throws if either
// residual field has zero variance.
double residual_correlation(const sfi::FrameGrid& clean,
                            const sfi::FrameGrid& regressed,
                            const sfi::FrameGrid& final);

}  // namespace uselab::twostage

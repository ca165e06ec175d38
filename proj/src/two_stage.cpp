// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "uselab/random_stream.hpp"

namespace uselab::twostage {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Picks a correction component whose induced pair satisfies
// fl(final - correction) == regressed. The transported value may move by a
// few ulps, which is far below any statistical tolerance used downstream.
// Splits a desired output value into (final, correction) around `regressed`
// such that final == regressed + correction holds exactly in double
// arithmetic. The correction is the rounded difference, and the final value
// is re-derived through the same addition the identity check performs, which
// moves it at most one rounding of (transported - regressed) away from the
// requested value.
void split_residual(double transported, double regressed, double* final_out,
                    double* corr_out) {
  const double c = transported - regressed;
  *corr_out = c;
  *final_out = regressed + c;
}

}  // namespace

Matrix Matrix::zeros(size_t rows, size_t cols) {
  Matrix m;
  m.rows = rows;
  m.cols = cols;
  m.a.assign(rows * cols, 0.0);
  return m;
}

Matrix Matrix::identity(size_t n) {
  Matrix m = zeros(n, n);
  for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
  if (x.size() != cols) {
    throw std::invalid_argument("matrix apply: dimension mismatch");
  }
  std::vector<double> out(rows, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = a.data() + r * cols;
    for (size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

std::vector<double> Matrix::apply_transposed(
    const std::vector<double>& x) const {
  if (x.size() != rows) {
    throw std::invalid_argument("matrix apply_transposed: dimension mismatch");
  }
  std::vector<double> out(cols, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    for (size_t c = 0; c < cols; ++c) out[c] += row[c] * x[r];
  }
  return out;
}

void LayerStack::validate() const {
  if (layers.empty()) throw std::invalid_argument("layer stack: empty");
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.rows == 0 || layer.weight.cols == 0 ||
        layer.weight.a.size() != layer.weight.rows * layer.weight.cols) {
      throw std::invalid_argument("layer stack: malformed weight");
    }
    if (layer.act == Activation::kLeakyRelu &&
        !(layer.leaky_slope >= 0.0 && layer.leaky_slope <= 1.0)) {
      throw std::invalid_argument(
          "layer stack: leaky slope must be in [0, 1]");
    }
    if (l > 0 && layer.weight.cols != layers[l - 1].weight.rows) {
      throw std::invalid_argument("layer stack: shape chain mismatch");
    }
  }
}

size_t LayerStack::input_width() const {
  validate();
  return layers.front().weight.cols;
}

std::vector<std::vector<double>> LayerStack::forward(
    const std::vector<double>& x) const {
  validate();
  std::vector<std::vector<double>> outs;
  std::vector<double> cur = x;
  for (const auto& layer : layers) {
    cur = layer.weight.apply(cur);
    if (layer.act == Activation::kLeakyRelu) {
      for (double& v : cur) v = v >= 0.0 ? v : layer.leaky_slope * v;
    }
    outs.push_back(cur);
  }
  return outs;
}

double spectral_norm_estimate(const Matrix& m, size_t max_iters) {
  if (m.rows == 0 || m.cols == 0 || m.a.size() != m.rows * m.cols) {
    throw std::invalid_argument("spectral norm: malformed matrix");
  }
  if (max_iters == 0) {
    throw std::invalid_argument("spectral norm: need at least one iteration");
  }
  // Fixed seeded start keeps the estimate reproducible across runs.
  RandomStream stream(0x5eed, "spectral-norm");
  std::vector<double> v(m.cols);
  for (double& x : v) x = stream.gaussian();
  const double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  for (double& x : v) x /= nv;

  double sigma = 0.0;
  for (size_t it = 0; it < max_iters; ++it) {
    auto u = m.apply(v);
    const double nu = norm2(u);
    if (nu == 0.0) return 0.0;
    for (double& x : u) x /= nu;
    auto w = m.apply_transposed(u);
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    const double prev = sigma;
    sigma = nw;
    for (size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(sigma - prev) <= 1e-15 * std::max(sigma, 1.0)) {
      break;
    }
  }
  return sigma;
}

LayerStack spectral_normalize(const LayerStack& stack, size_t max_iters) {
  stack.validate();
  LayerStack out = stack;
  for (auto& layer : out.layers) {
    const double sigma = spectral_norm_estimate(layer.weight, max_iters);
    if (sigma <= 0.0) {
      throw std::invalid_argument(
          "spectral_normalize: zero spectral norm weight");
    }
    for (double& w : layer.weight.a) w /= sigma;
    layer.norm_estimate = spectral_norm_estimate(layer.weight, max_iters);
  }
  return out;
}

nlohmann::json LipschitzReport::to_json() const {
  return nlohmann::json{{"lhs", lhs},
                        {"rhs", rhs},
                        {"slack", slack},
                        {"min_slack", min_slack},
                        {"lipschitz_bound", lipschitz_bound}};
}

LipschitzReport lipschitz_check(const LayerStack& stack,
                                const std::vector<double>& a,
                                const std::vector<double>& b) {
  stack.validate();
  if (a.size() != stack.input_width() || b.size() != a.size()) {
    throw std::invalid_argument("lipschitz_check: input width mismatch");
  }
  for (const auto& layer : stack.layers) {
    if (!(layer.norm_estimate > 0.0)) {
      throw std::invalid_argument(
          "lipschitz_check: stack has no recorded norm estimates "
          "(run spectral_normalize first)");
    }
  }

  std::vector<double> diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double input_dist = norm2(diff);

  const auto fa = stack.forward(a);
  const auto fb = stack.forward(b);

  LipschitzReport rep;
  double bound = 1.0;
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    // Leaky slope <= 1 keeps every activation 1-Lipschitz, so the layer
    // bound is the weight norm alone.
    bound *= stack.layers[l].norm_estimate;
    std::vector<double> d(fa[l].size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = fa[l][i] - fb[l][i];
    rep.lhs.push_back(norm2(d));
    rep.rhs.push_back(bound * input_dist);
    rep.slack.push_back(rep.rhs.back() - rep.lhs.back());
  }
  rep.lipschitz_bound = bound;
  rep.min_slack = *std::min_element(rep.slack.begin(), rep.slack.end());
  return rep;
}

sfi::FrameGrid oracle_regression(const sfi::FrameGrid& noisy,
                                 const std::vector<double>& noise_psd) {
  noisy.validate();
  if (noise_psd.size() != noisy.params.n_bins) {
    throw std::invalid_argument("oracle_regression: psd size mismatch");
  }
  for (double p : noise_psd) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument(
          "oracle_regression: psd must be finite and >= 0");
    }
  }
  sfi::FrameGrid out = noisy;
  for (size_t f = 0; f < out.n_frames; ++f) {
    for (size_t b = 0; b < out.params.n_bins; ++b) {
      const auto& x = noisy.at(f, b);
      const double power = std::norm(x);
      const double num = std::max(power - noise_psd[b], 0.0);
      const double den = num + noise_psd[b];
      const double gain = den > 0.0 ? num / den : 1.0;
      out.at(f, b) = x * gain;
    }
  }
  return out;
}

double TransportCorrector::lookup(size_t bin, double u) const {
  if (bin >= tables.size()) {
    throw std::invalid_argument("corrector lookup: bin out of range");
  }
  const auto& t = tables[bin];
  const double q = static_cast<double>(n_quantiles);
  // table entry k holds the (k + 0.5)/Q quantile
  const double pos = std::clamp(u * q - 0.5, 0.0, q - 1.0);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, n_quantiles - 1);
  const double frac = pos - static_cast<double>(lo);
  return t[lo] * (1.0 - frac) + t[hi] * frac;
}

void TransportCorrector::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open corrector file for writing: " + path);
  f.write("UTC1", 4);
  const uint32_t fields[5] = {static_cast<uint32_t>(params.sample_rate),
                              static_cast<uint32_t>(params.win_len),
                              static_cast<uint32_t>(params.hop_len),
                              static_cast<uint32_t>(params.n_bins),
                              static_cast<uint32_t>(n_quantiles)};
  f.write(reinterpret_cast<const char*>(fields), sizeof(fields));
  for (const auto& row : tables) {
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!f) throw IoError("failed to write corrector file: " + path);
}

TransportCorrector TransportCorrector::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open corrector file: " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "UTC1", 4) != 0) {
    throw std::invalid_argument("bad corrector file magic: " + path);
  }
  uint32_t fields[5];
  if (!f.read(reinterpret_cast<char*>(fields), sizeof(fields))) {
    throw std::invalid_argument("truncated corrector file: " + path);
  }
  TransportCorrector c;
  c.params = sfi::SfiParams::for_rate(static_cast<int>(fields[0]));
  if (c.params.win_len != fields[1] || c.params.hop_len != fields[2] ||
      c.params.n_bins != fields[3]) {
    throw std::invalid_argument("corrector params mismatch: " + path);
  }
  c.n_quantiles = fields[4];
  c.tables.assign(c.params.n_bins, std::vector<double>(c.n_quantiles));
  for (auto& row : c.tables) {
    if (!f.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)))) {
      throw std::invalid_argument("truncated corrector file: " + path);
    }
  }
  return c;
}

TransportCorrector fit_corrector(
    const std::vector<const sfi::FrameGrid*>& reference_grids,
    size_t n_quantiles) {
  if (reference_grids.empty()) {
    throw std::invalid_argument("fit_corrector: no reference grids");
  }
  if (n_quantiles < 2) {
    throw std::invalid_argument("fit_corrector: need at least 2 quantiles");
  }
  const sfi::SfiParams params = reference_grids.front()->params;
  size_t total_frames = 0;
  for (const auto* g : reference_grids) {
    g->validate();
    if (!(g->params == params)) {
      throw std::invalid_argument("fit_corrector: grid params differ");
    }
    total_frames += g->n_frames;
  }
  if (total_frames == 0) {
    throw std::invalid_argument("fit_corrector: reference grids are empty");
  }

  TransportCorrector c;
  c.params = params;
  c.n_quantiles = n_quantiles;
  c.tables.assign(params.n_bins, std::vector<double>(n_quantiles));

  std::vector<double> mags;
  mags.reserve(total_frames);
  for (size_t b = 0; b < params.n_bins; ++b) {
    mags.clear();
    for (const auto* g : reference_grids) {
      for (size_t f = 0; f < g->n_frames; ++f) {
        mags.push_back(std::abs(g->at(f, b)));
      }
    }
    std::sort(mags.begin(), mags.end());
    const double n = static_cast<double>(mags.size());
    for (size_t k = 0; k < n_quantiles; ++k) {
      const double u = (static_cast<double>(k) + 0.5) /
                       static_cast<double>(n_quantiles);
      const double pos = std::clamp(u * n - 0.5, 0.0, n - 1.0);
      const size_t lo = static_cast<size_t>(pos);
      const size_t hi = std::min(lo + 1, mags.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      c.tables[b][k] = mags[lo] * (1.0 - frac) + mags[hi] * frac;
    }
  }
  return c;
}

CorrectionResult transport_correct(const sfi::FrameGrid& regressed,
                                   const TransportCorrector& corrector) {
  regressed.validate();
  if (!(regressed.params == corrector.params)) {
    throw std::invalid_argument("transport_correct: grid/corrector mismatch");
  }
  const size_t frames = regressed.n_frames;
  const size_t bins = regressed.params.n_bins;
  if (frames == 0) {
    throw std::invalid_argument("transport_correct: empty grid");
  }

  CorrectionResult res;
  res.final = regressed;
  res.correction = regressed;
  for (auto& c : res.correction.data) c = {0.0, 0.0};

  std::vector<size_t> order(frames);
  for (size_t b = 0; b < bins; ++b) {
    // ranks: stable sort by magnitude, ties by frame index
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
      return std::abs(regressed.at(x, b)) < std::abs(regressed.at(y, b));
    });
    for (size_t k = 0; k < frames; ++k) {
      const size_t f = order[k];
      const std::complex<double> x = regressed.at(f, b);
      const double mag = std::abs(x);
      const double u =
          (static_cast<double>(k) + 0.5) / static_cast<double>(frames);
      const double target = corrector.lookup(b, u);
      // keep the phase; zero cells get zero phase
      std::complex<double> transported;
      if (mag > 0.0) {
        transported = x * (target / mag);
      } else {
        transported = {target, 0.0};
      }
      double fre, cre, fim, cim;
      split_residual(transported.real(), x.real(), &fre, &cre);
      split_residual(transported.imag(), x.imag(), &fim, &cim);
      res.final.at(f, b) = {fre, fim};
      res.correction.at(f, b) = {cre, cim};
    }
  }
  return res;
}

bool residual_identity_holds(const sfi::FrameGrid& final,
                             const sfi::FrameGrid& correction,
                             const sfi::FrameGrid& regressed) {
  if (final.data.size() != correction.data.size() ||
      final.data.size() != regressed.data.size()) {
    return false;
  }
  for (size_t i = 0; i < final.data.size(); ++i) {
    if (regressed.data[i].real() + correction.data[i].real() !=
            final.data[i].real() ||
        regressed.data[i].imag() + correction.data[i].imag() !=
            final.data[i].imag()) {
      return false;
    }
  }
  return true;
}

double residual_correlation(const sfi::FrameGrid& clean,
                            const sfi::FrameGrid& regressed,
                            const sfi::FrameGrid& final) {
  clean.validate();
  regressed.validate();
  final.validate();
  if (clean.data.size() != regressed.data.size() ||
      clean.data.size() != final.data.size()) {
    throw std::invalid_argument("residual_correlation: size mismatch");
  }
  const size_t n = clean.data.size();
  if (n < 2) {
    throw std::invalid_argument("residual_correlation: too few cells");
  }

  std::vector<double> ra(n), rb(n);
  for (size_t i = 0; i < n; ++i) {
    ra[i] = std::abs(clean.data[i]) - std::abs(regressed.data[i]);
    rb[i] = std::abs(final.data[i]) - std::abs(regressed.data[i]);
  }
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = ra[i] - ma;
    const double db = rb[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) {
    throw std::invalid_argument(
        "residual_correlation: zero-variance residual");
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace uselab::twostage

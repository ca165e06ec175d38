// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <cstring>
#include <filesystem>

#include <Eigen/Dense>
#include <doctest.h>

#include "uselab/random_stream.hpp"
#include "uselab/sfi_stft.hpp"
#include "uselab/two_stage.hpp"

namespace {

using uselab::twostage::Matrix;

Matrix random_matrix(uselab::RandomStream& s, size_t rows, size_t cols,
                     double scale = 1.0) {
  Matrix m = Matrix::zeros(rows, cols);
  for (double& v : m.a) v = scale * s.gaussian();
  return m;
}

// Independent route to the largest singular value.
double svd_norm(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < m.cols; ++c) e(long(r), long(c)) = m.at(r, c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  return svd.singularValues()(0);
}

uselab::sfi::FrameGrid noisy_grid(int fs, double dur_s, uint64_t seed,
                                  double noise_amp) {
  uselab::RandomStream s(seed, "grid-src");
  uselab::AudioBuffer buf;
  buf.sample_rate = fs;
  buf.samples.resize(static_cast<size_t>(dur_s * fs));
  for (double& v : buf.samples) {
    v = 0.4 * s.gaussian() + noise_amp * s.gaussian();
  }
  return uselab::sfi::stft(buf);
}

}  // namespace

TEST_SUITE("two_stage") {

TEST_CASE("power iteration matches an independent svd") {
  uselab::RandomStream s(7, "sn");
  for (int trial = 0; trial < 12; ++trial) {
    const size_t rows = 2 + (s.next_u64() % 15);
    const size_t cols = 2 + (s.next_u64() % 15);
    const auto m = random_matrix(s, rows, cols);
    const double mine = uselab::twostage::spectral_norm_estimate(m);
    const double ref = svd_norm(m);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(uselab::twostage::spectral_norm_estimate(Matrix::identity(5)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uselab::twostage::spectral_norm_estimate(Matrix::zeros(4, 4)) == 0.0);
}

TEST_CASE("normalization brings every layer to unit norm") {
  uselab::RandomStream s(8, "norm");
  uselab::twostage::LayerStack stack;
  for (size_t depth = 0; depth < 4; ++depth) {
    uselab::twostage::Layer layer;
    layer.weight = random_matrix(s, 6, 6, 3.0);
    layer.act = uselab::twostage::Activation::kLeakyRelu;
    layer.leaky_slope = 0.2;
    stack.layers.push_back(std::move(layer));
  }
  const auto normed = uselab::twostage::spectral_normalize(stack);
  for (const auto& layer : normed.layers) {
    CHECK(layer.norm_estimate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(svd_norm(layer.weight) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("feature distances obey the layer-product bound") {
  uselab::RandomStream s(9, "lip");
  for (size_t depth = 1; depth <= 8; ++depth) {
    uselab::twostage::LayerStack stack;
    size_t width = 10;
    for (size_t l = 0; l < depth; ++l) {
      uselab::twostage::Layer layer;
      const size_t next = 4 + (s.next_u64() % 10);
      layer.weight = random_matrix(s, next, width, 2.0);
      layer.act = (l % 2 == 0) ? uselab::twostage::Activation::kLeakyRelu
                               : uselab::twostage::Activation::kIdentity;
      layer.leaky_slope = 0.1 + 0.5 * s.uniform();
      width = next;
      stack.layers.push_back(std::move(layer));
    }
    const auto normed = uselab::twostage::spectral_normalize(stack);
    for (int pair = 0; pair < 50; ++pair) {
      std::vector<double> a(normed.input_width()), b(normed.input_width());
      for (double& v : a) v = 2.0 * s.gaussian();
      for (double& v : b) v = 2.0 * s.gaussian();
      const auto rep = uselab::twostage::lipschitz_check(normed, a, b);
      REQUIRE(rep.lhs.size() == depth);
      CHECK(rep.min_slack >= -1e-9);
      CHECK(rep.lipschitz_bound == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("lipschitz check validates inputs") {
  uselab::RandomStream s(10, "lip-bad");
  uselab::twostage::LayerStack stack;
  uselab::twostage::Layer layer;
  layer.weight = random_matrix(s, 3, 3);
  layer.norm_estimate = 0.0;  // not estimated yet
  stack.layers.push_back(layer);
  std::vector<double> a(3, 0.0), b(3, 1.0);
  CHECK_THROWS_AS(uselab::twostage::lipschitz_check(stack, a, b),
                  std::invalid_argument);
  stack.layers[0].norm_estimate = 1.0;
  std::vector<double> short_vec(2, 0.0);
  CHECK_THROWS_AS(uselab::twostage::lipschitz_check(stack, short_vec, b),
                  std::invalid_argument);
}

TEST_CASE("zero noise psd makes regression an exact no-op") {
  const auto grid = noisy_grid(16000, 0.3, 21, 0.0);
  const std::vector<double> psd(grid.params.n_bins, 0.0);
  const auto out = uselab::twostage::oracle_regression(grid, psd);
  REQUIRE(out.data.size() == grid.data.size());
  CHECK(std::memcmp(out.data.data(), grid.data.data(),
                    grid.data.size() * sizeof(grid.data[0])) == 0);
}

TEST_CASE("regression shrinks magnitudes, never grows them") {
  const auto grid = noisy_grid(16000, 0.4, 22, 0.3);
  std::vector<double> psd(grid.params.n_bins, 0.0);
  // estimate per-bin noise power as a fraction of the average power
  for (size_t b = 0; b < grid.params.n_bins; ++b) {
    double acc = 0.0;
    for (size_t f = 0; f < grid.n_frames; ++f) acc += std::norm(grid.at(f, b));
    psd[b] = 0.25 * acc / double(grid.n_frames);
  }
  const auto out = uselab::twostage::oracle_regression(grid, psd);
  bool all_shrunk = true, phase_kept = true, some_shrunk = false;
  for (size_t i = 0; i < grid.data.size(); ++i) {
    const double before = std::abs(grid.data[i]);
    const double after = std::abs(out.data[i]);
    all_shrunk = all_shrunk && after <= before * (1.0 + 1e-12);
    some_shrunk = some_shrunk || after < before * 0.999;
    if (before > 1e-9 && after > 1e-12) {
      const auto ratio = out.data[i] / grid.data[i];
      phase_kept = phase_kept && std::abs(ratio.imag()) < 1e-9;
    }
  }
  CHECK(all_shrunk);
  CHECK(some_shrunk);
  CHECK(phase_kept);
  CHECK_THROWS_AS(
      uselab::twostage::oracle_regression(grid, std::vector<double>(3, 0.0)),
      std::invalid_argument);
}

TEST_CASE("corrector tables are monotone and interpolation is bounded") {
  const auto clean = noisy_grid(16000, 0.5, 23, 0.0);
  const auto corr = uselab::twostage::fit_corrector({&clean}, 64);
  CHECK(corr.n_quantiles == 64);
  REQUIRE(corr.tables.size() == clean.params.n_bins);
  for (const auto& row : corr.tables) {
    REQUIRE(row.size() == 64);
    for (size_t k = 1; k < row.size(); ++k) CHECK(row[k] >= row[k - 1]);
  }
  const double lo = corr.lookup(0, 0.0);
  const double hi = corr.lookup(0, 1.0);
  CHECK(lo == corr.tables[0].front());
  CHECK(hi == corr.tables[0].back());
  CHECK(corr.lookup(0, 0.5) >= lo);
  CHECK(corr.lookup(0, 0.5) <= hi);
}

TEST_CASE("corrector file round trip") {
  const auto clean = noisy_grid(22050, 0.3, 24, 0.0);
  const auto corr = uselab::twostage::fit_corrector({&clean}, 32);
  const auto path =
      (std::filesystem::temp_directory_path() / "uselab_t_corr.bin").string();
  corr.save(path);
  const auto back = uselab::twostage::TransportCorrector::load(path);
  CHECK(back.params == corr.params);
  CHECK(back.n_quantiles == corr.n_quantiles);
  REQUIRE(back.tables.size() == corr.tables.size());
  double worst = 0.0;
  for (size_t b = 0; b < back.tables.size(); ++b) {
    for (size_t k = 0; k < back.tables[b].size(); ++k) {
      worst = std::max(worst,
                       std::abs(back.tables[b][k] - corr.tables[b][k]));
    }
  }
  CHECK(worst == 0.0);  // stored as float64
  CHECK_THROWS_AS(uselab::twostage::TransportCorrector::load("/no/file"),
                  uselab::IoError);
}

TEST_CASE("transport correction restores the reference distribution") {
  const auto clean = noisy_grid(16000, 0.8, 25, 0.0);
  auto shrunk = clean;
  // simulate over-smoothing: squash magnitudes nonlinearly, keep phases
  for (auto& c : shrunk.data) {
    const double m = std::abs(c);
    if (m > 0.0) c *= std::pow(m, -0.3) * 0.6;
  }
  const auto corr = uselab::twostage::fit_corrector({&clean}, 256);
  const auto res = uselab::twostage::transport_correct(shrunk, corr);

  // residual identity: final - correction == regressed, bit for bit
  CHECK(uselab::twostage::residual_identity_holds(res.final, res.correction,
                                                  shrunk));

  // per-bin KS distance between corrected magnitudes and the reference
  const double bound =
      2.0 / std::sqrt(double(clean.n_frames)) + 1.0 / 256.0;
  for (size_t b = 0; b < clean.params.n_bins; b += 37) {
    std::vector<double> ref(clean.n_frames), got(clean.n_frames);
    for (size_t f = 0; f < clean.n_frames; ++f) {
      ref[f] = std::abs(clean.at(f, b));
      got[f] = std::abs(res.final.at(f, b));
    }
    std::sort(ref.begin(), ref.end());
    std::sort(got.begin(), got.end());
    // two-sample KS on the merged grid
    double ks = 0.0;
    size_t i = 0, j = 0;
    while (i < ref.size() && j < got.size()) {
      if (ref[i] <= got[j]) {
        ++i;
      } else {
        ++j;
      }
      ks = std::max(ks, std::abs(double(i) / ref.size() -
                                 double(j) / got.size()));
    }
    CHECK(ks <= bound);
  }
}

TEST_CASE("residual identity survives extreme magnitude gaps") {
  // construct a grid whose corrected values differ wildly from the inputs
  const auto clean = noisy_grid(16000, 0.4, 26, 0.0);
  auto tiny = clean;
  for (auto& c : tiny.data) c *= 1e-3;
  const auto corr = uselab::twostage::fit_corrector({&clean}, 128);
  const auto res = uselab::twostage::transport_correct(tiny, corr);
  CHECK(uselab::twostage::residual_identity_holds(res.final, res.correction,
                                                  tiny));
}

TEST_CASE("residual correlation is exactly one for identical stages") {
  const auto clean = noisy_grid(16000, 0.3, 27, 0.0);
  const auto regressed = noisy_grid(16000, 0.3, 28, 0.1);
  const double r =
      uselab::twostage::residual_correlation(clean, regressed, clean);
  CHECK(r == 1.0);  // exact, not approximate
}

TEST_CASE("residual correlation rejects degenerate inputs") {
  const auto clean = noisy_grid(16000, 0.2, 29, 0.0);
  CHECK_THROWS_AS(uselab::twostage::residual_correlation(clean, clean, clean),
                  std::invalid_argument);
}

TEST_CASE("matrix forward pass shapes") {
  uselab::RandomStream s(30, "shapes");
  uselab::twostage::LayerStack stack;
  uselab::twostage::Layer l1, l2;
  l1.weight = random_matrix(s, 4, 6);
  l2.weight = random_matrix(s, 2, 4);
  stack.layers = {l1, l2};
  CHECK(stack.input_width() == 6);
  std::vector<double> x(6, 0.5);
  const auto outs = stack.forward(x);
  REQUIRE(outs.size() == 2);
  CHECK(outs[0].size() == 4);
  CHECK(outs[1].size() == 2);

  uselab::twostage::LayerStack bad;
  uselab::twostage::Layer l3;
  l3.weight = random_matrix(s, 3, 5);  // widths don't chain
  bad.layers = {l1, l3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

}  // TEST_SUITE

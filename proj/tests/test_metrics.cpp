// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>

#include <doctest.h>

#include "uselab/metrics.hpp"
#include "uselab/random_stream.hpp"

namespace {

uselab::AudioBuffer noise_buf(int fs, double dur_s, uint64_t seed,
                              double amp = 0.3) {
  uselab::RandomStream s(seed, "metric-noise");
  uselab::AudioBuffer buf;
  buf.sample_rate = fs;
  buf.samples.resize(static_cast<size_t>(dur_s * fs));
  for (double& v : buf.samples) v = amp * s.gaussian();
  return buf;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("sdr identity hits the cap exactly") {
  const auto ref = noise_buf(16000, 0.5, 1);
  CHECK(uselab::metrics::sdr_db(ref, ref) == 100.0);
}

TEST_CASE("sdr halved amplitude is the hand-computed 6.02 dB") {
  const auto ref = noise_buf(16000, 0.5, 2);
  auto est = ref;
  for (double& v : est.samples) v *= 0.5;
  // residual is exactly half the reference: 10*log10(1/0.25)
  CHECK(uselab::metrics::sdr_db(ref, est) ==
        doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("sdr scales with residual energy") {
  const auto ref = noise_buf(16000, 0.5, 3);
  auto est = ref;
  for (double& v : est.samples) v *= 1.001;
  CHECK(uselab::metrics::sdr_db(ref, est) ==
        doctest::Approx(60.0).epsilon(1e-6));
}

TEST_CASE("sdr rejects silent references and mismatched pairs") {
  uselab::AudioBuffer silent;
  silent.sample_rate = 16000;
  silent.samples.assign(100, 0.0);
  const auto est = noise_buf(16000, 100.0 / 16000.0, 4);
  CHECK_THROWS_AS(uselab::metrics::sdr_db(silent, est),
                  std::invalid_argument);

  auto other = noise_buf(8000, 0.5, 5);
  const auto ref = noise_buf(16000, 0.5, 6);
  CHECK_THROWS_AS(uselab::metrics::sdr_db(ref, other),
                  std::invalid_argument);
}

TEST_CASE("lsd identity is exactly zero") {
  const auto ref = noise_buf(22050, 0.4, 7);
  CHECK(uselab::metrics::lsd_db(ref, ref) == 0.0);
}

TEST_CASE("lsd at half amplitude is the hand-computed 6.02 dB") {
  // every spectral cell's power drops by a factor 4, so each per-frame RMS
  // of the log-power ratio equals |10 log10 4|
  const auto ref = noise_buf(16000, 1.0, 8, 0.5);
  auto est = ref;
  for (double& v : est.samples) v *= 0.5;
  CHECK(uselab::metrics::lsd_db(ref, est) ==
        doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-3));
}

TEST_CASE("lsd grows with distortion severity") {
  const auto ref = noise_buf(16000, 0.5, 9);
  auto mild = ref;
  auto severe = ref;
  uselab::RandomStream s(10, "lsd-noise");
  for (size_t i = 0; i < ref.size(); ++i) {
    const double n = s.gaussian();
    mild.samples[i] += 0.01 * n;
    severe.samples[i] += 0.2 * n;
  }
  CHECK(uselab::metrics::lsd_db(ref, mild) <
        uselab::metrics::lsd_db(ref, severe));
}

TEST_CASE("mcd identity is exactly zero and gain drops out") {
  const auto ref = noise_buf(16000, 0.6, 11);
  CHECK(uselab::metrics::mcd(ref, ref) == 0.0);

  auto loud = ref;
  for (double& v : loud.samples) v *= 3.7;
  // cepstra c1..c13 are gain invariant (the gain lands entirely in c0)
  CHECK(uselab::metrics::mcd(ref, loud) <= 1e-9);
}

TEST_CASE("mcd detects spectral reshaping") {
  const auto ref = noise_buf(16000, 0.6, 12);
  auto tilted = ref;
  // first-difference filter tilts the spectrum up strongly
  for (size_t i = tilted.size() - 1; i > 0; --i) {
    tilted.samples[i] = tilted.samples[i] - 0.8 * tilted.samples[i - 1];
  }
  CHECK(uselab::metrics::mcd(ref, tilted) > 1.0);
}

TEST_CASE("evaluate bundles all three metrics") {
  const auto ref = noise_buf(16000, 0.3, 13);
  auto est = ref;
  for (double& v : est.samples) v *= 0.9;
  const auto j = uselab::metrics::evaluate(ref, est);
  CHECK(j.contains("sdr_db"));
  CHECK(j.contains("lsd_db"));
  CHECK(j.contains("mcd"));
  CHECK(j["sdr_db"].get<double>() == doctest::Approx(20.0).epsilon(0.001));
}

}  // TEST_SUITE

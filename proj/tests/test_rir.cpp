// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <cstring>

#include <doctest.h>

#include "uselab/random_stream.hpp"
#include "uselab/rir.hpp"

namespace {

// Exponentially decaying random tail after a dominant peak, with optional
// small pre-peak energy (propagation modeling artifacts).
uselab::AudioBuffer synth_rir(uselab::RandomStream& s, int fs,
                              double dur_s = 0.3, size_t peak_at = 40) {
  uselab::AudioBuffer r;
  r.sample_rate = fs;
  const size_t n = static_cast<size_t>(dur_s * fs);
  r.samples.assign(n, 0.0);
  for (size_t i = 0; i < peak_at; ++i) {
    r.samples[i] = 0.01 * s.gaussian();
  }
  const double gain = 0.5 + s.uniform();
  r.samples[peak_at] = gain * (s.uniform() < 0.5 ? -1.0 : 1.0);
  // |peak| must dominate: keep the tail strictly below it
  for (size_t i = peak_at + 1; i < n; ++i) {
    const double env = std::exp(-3.0 * double(i - peak_at) / fs * 20.0);
    r.samples[i] = 0.45 * gain * env * s.gaussian() / 3.0;
  }
  return r;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() ||
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("rir") {

TEST_CASE("direct path picks the max-abs tap, first on ties") {
  uselab::AudioBuffer r;
  r.sample_rate = 16000;
  r.samples = {0.1, -0.9, 0.3, 0.9, 0.2};
  CHECK(uselab::rir::estimate_direct_path(r) == 1);  // tie at |.9|: first wins
  r.samples = {0.0, 0.2, 0.95, 0.2};
  CHECK(uselab::rir::estimate_direct_path(r) == 2);
}

TEST_CASE("decomposition reconstructs the rir") {
  uselab::RandomStream s(2024, "rir-reconstruct");
  for (int trial = 0; trial < 20; ++trial) {
    const int fs = (trial % 2 == 0) ? 16000 : 48000;
    const auto r = synth_rir(s, fs);
    const auto dec = uselab::rir::decompose(r, 50.0);
    CHECK(dec.direct_index == uselab::rir::estimate_direct_path(r));
    CHECK(dec.early[0] == 1.0);  // peak normalized exactly
    const auto back = dec.reconstruct();
    REQUIRE(back.size() == r.size());
    double max_err = 0.0;
    for (size_t i = 0; i < back.size(); ++i) {
      max_err = std::max(max_err, std::abs(back[i] - r.samples[i]));
    }
    CHECK(max_err <= 1e-12);
  }
}

TEST_CASE("early window length follows the sample rate") {
  uselab::RandomStream s(9, "rir-window");
  const auto r16 = synth_rir(s, 16000);
  const auto r48 = synth_rir(s, 48000);
  CHECK(uselab::rir::decompose(r16, 50.0).early.size() == 800);
  CHECK(uselab::rir::decompose(r48, 50.0).early.size() == 2400);
  CHECK(uselab::rir::decompose(r16, 0.0).early.size() == 1);
}

TEST_CASE("window validation") {
  uselab::RandomStream s(10, "rir-bad");
  const auto r = synth_rir(s, 16000);
  CHECK_THROWS_AS(uselab::rir::decompose(r, -1.0), std::invalid_argument);
  uselab::AudioBuffer empty;
  empty.sample_rate = 16000;
  CHECK_THROWS_AS(uselab::rir::decompose(empty, 50.0), std::invalid_argument);
}

TEST_CASE("target spec parsing") {
  using uselab::rir::TargetKind;
  using uselab::rir::TargetSpec;
  CHECK(TargetSpec::parse("anechoic").kind == TargetKind::kAnechoic);
  CHECK(TargetSpec::parse("shifted_anechoic").kind ==
        TargetKind::kShiftedAnechoic);
  const auto er = TargetSpec::parse("early_reflected:25");
  CHECK(er.kind == TargetKind::kEarlyReflected);
  CHECK(er.window_ms == 25.0);
  const auto round = TargetSpec::parse(er.to_string());
  CHECK(round.kind == TargetKind::kEarlyReflected);
  CHECK(round.window_ms == 25.0);
  CHECK_THROWS_AS(TargetSpec::parse("nope"), std::invalid_argument);
  CHECK_THROWS_AS(TargetSpec::parse("early_reflected:-3"),
                  std::invalid_argument);
}

TEST_CASE("shifted anechoic target delays by the direct index") {
  uselab::RandomStream s(77, "rir-shift");
  uselab::AudioBuffer speech;
  speech.sample_rate = 16000;
  speech.samples.resize(4000);
  for (double& v : speech.samples) v = 0.3 * s.gaussian();
  const auto r = synth_rir(s, 16000, 0.1, 23);
  const auto dec = uselab::rir::decompose(r, 50.0);
  REQUIRE(dec.direct_index == 23);

  const auto tgt = uselab::rir::make_target(
      speech, dec, uselab::rir::TargetSpec::parse("shifted_anechoic"));
  REQUIRE(tgt.size() == speech.size());
  for (size_t i = 0; i < 23; ++i) CHECK(tgt.samples[i] == 0.0);
  for (size_t i = 23; i < tgt.size(); ++i) {
    CHECK(tgt.samples[i] == speech.samples[i - 23]);  // bitwise copy
  }

  const auto ane = uselab::rir::make_target(
      speech, dec, uselab::rir::TargetSpec::parse("anechoic"));
  CHECK(bitwise_equal(ane.samples, speech.samples));
}

TEST_CASE("zero-width early window collapses to the shifted target") {
  uselab::RandomStream s(123, "rir-collapse");
  for (int trial = 0; trial < 20; ++trial) {
    uselab::AudioBuffer speech;
    speech.sample_rate = 16000;
    speech.samples.resize(2000 + 37 * trial);
    for (double& v : speech.samples) v = 0.3 * s.gaussian();
    const auto r = synth_rir(s, 16000, 0.08, 10 + trial);
    const auto dec = uselab::rir::decompose(r, 50.0);
    const auto a = uselab::rir::make_target(
        speech, dec, uselab::rir::TargetSpec::parse("early_reflected:0"));
    const auto b = uselab::rir::make_target(
        speech, dec, uselab::rir::TargetSpec::parse("shifted_anechoic"));
    CHECK(bitwise_equal(a.samples, b.samples));
  }
}

TEST_CASE("early reflected target keeps early energy only") {
  uselab::RandomStream s(55, "rir-early");
  uselab::AudioBuffer impulse;
  impulse.sample_rate = 16000;
  impulse.samples.assign(3000, 0.0);
  impulse.samples[0] = 1.0;

  const auto r = synth_rir(s, 16000, 0.15, 30);
  const auto dec = uselab::rir::decompose(r, 50.0);
  const auto tgt = uselab::rir::make_target(
      impulse, dec, uselab::rir::TargetSpec::parse("early_reflected:50"));
  // feeding an impulse exposes the effective target kernel: the normalized
  // early part placed at the direct index, nothing later
  const size_t early_len = dec.early.size();
  REQUIRE(tgt.size() == impulse.size());
  bool all_match = true;
  for (size_t i = 0; i < tgt.size(); ++i) {
    const double expect =
        (i >= 30 && i - 30 < early_len) ? dec.early[i - 30] : 0.0;
    all_match = all_match && std::abs(tgt.samples[i] - expect) <= 1e-12;
  }
  CHECK(all_match);
}

TEST_CASE("render matches manual convolution") {
  uselab::RandomStream s(31, "rir-render");
  uselab::AudioBuffer speech;
  speech.sample_rate = 16000;
  speech.samples.resize(500);
  for (double& v : speech.samples) v = s.gaussian();
  const auto r = synth_rir(s, 16000, 0.02, 5);
  const auto wet = uselab::rir::render_reverberant(speech, r);
  REQUIRE(wet.size() == speech.size());
  for (size_t i : {size_t{0}, size_t{5}, size_t{499}}) {
    double acc = 0.0;
    for (size_t j = 0; j < r.size() && j <= i; ++j) {
      acc += r.samples[j] * speech.samples[i - j];
    }
    CHECK(wet.samples[i] == doctest::Approx(acc).epsilon(1e-10));
  }
}

TEST_CASE("sample-rate mismatch is rejected") {
  uselab::RandomStream s(3, "rir-mismatch");
  uselab::AudioBuffer speech;
  speech.sample_rate = 16000;
  speech.samples.assign(100, 0.1);
  const auto r = synth_rir(s, 48000, 0.02, 5);
  CHECK_THROWS_AS(uselab::rir::render_reverberant(speech, r),
                  std::invalid_argument);
}

}  // TEST_SUITE

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/rir.hpp"

#include <algorithm>
#include <cmath>

#include "uselab/dsp.hpp"

namespace uselab::rir {

namespace {

// Number of taps in the early segment: at least the peak tap itself.
size_t early_len_for(double window_ms, int fs) {
  const auto n = static_cast<long long>(std::llround(window_ms * fs / 1000.0));
  return static_cast<size_t>(std::max(1LL, n));
}

}  // namespace

std::vector<double> Decomposition::reconstruct() const {
  std::vector<double> r(rir_length, 0.0);
  std::copy(pre_peak.begin(), pre_peak.end(), r.begin());
  size_t pos = direct_index;
  for (double v : early) {
    if (pos >= rir_length) break;
    r[pos++] = gain * v;
  }
  for (double v : late) {
    if (pos >= rir_length) break;
    r[pos++] = gain * v;
  }
  return r;
}

nlohmann::json Decomposition::to_json() const {
  return nlohmann::json{{"direct_index", direct_index},
                        {"gain", gain},
                        {"early_window_ms", early_window_ms},
                        {"sample_rate", sample_rate},
                        {"lengths",
                         {{"pre_peak", pre_peak.size()},
                          {"early", early.size()},
                          {"late", late.size()},
                          {"rir", rir_length}}}};
}

TargetSpec TargetSpec::parse(const std::string& text) {
  TargetSpec spec;
  if (text == "anechoic") {
    spec.kind = TargetKind::kAnechoic;
  } else if (text == "shifted_anechoic") {
    spec.kind = TargetKind::kShiftedAnechoic;
  } else if (text.rfind("early_reflected", 0) == 0) {
    spec.kind = TargetKind::kEarlyReflected;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      spec.window_ms = std::stod(text.substr(colon + 1));
    }
    if (!(spec.window_ms >= 0.0)) {
      throw std::invalid_argument("target window must be >= 0 ms: " + text);
    }
  } else {
    throw std::invalid_argument("unknown target kind: " + text);
  }
  return spec;
}

std::string TargetSpec::to_string() const {
  switch (kind) {
    case TargetKind::kAnechoic: return "anechoic";
    case TargetKind::kShiftedAnechoic: return "shifted_anechoic";
    case TargetKind::kEarlyReflected:
      return "early_reflected:" + std::to_string(window_ms);
  }
  return "?";
}

size_t estimate_direct_path(const AudioBuffer& rir) {
  rir.validate("rir");
  if (rir.empty()) throw std::invalid_argument("rir: empty impulse response");
  size_t best = 0;
  double best_mag = -1.0;
  for (size_t i = 0; i < rir.size(); ++i) {
    const double m = std::abs(rir.samples[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  if (best_mag == 0.0) {
    throw std::invalid_argument("rir: all-zero impulse response");
  }
  return best;
}

Decomposition decompose(const AudioBuffer& rir, double early_window_ms) {
  if (early_window_ms < 0.0) {
    throw std::invalid_argument("decompose: early window must be >= 0 ms");
  }
  const size_t n0 = estimate_direct_path(rir);
  const double gain = rir.samples[n0];

  Decomposition dec;
  dec.direct_index = n0;
  dec.gain = gain;
  dec.early_window_ms = early_window_ms;
  dec.sample_rate = rir.sample_rate;
  dec.rir_length = rir.size();
  dec.pre_peak.assign(rir.samples.begin(),
                      rir.samples.begin() + static_cast<long>(n0));

  const size_t tail_len = rir.size() - n0;
  const size_t e_len = std::min(early_len_for(early_window_ms, rir.sample_rate),
                                tail_len);
  dec.early.resize(e_len);
  for (size_t i = 0; i < e_len; ++i) dec.early[i] = rir.samples[n0 + i] / gain;
  dec.late.resize(tail_len - e_len);
  for (size_t i = 0; i < dec.late.size(); ++i) {
    dec.late[i] = rir.samples[n0 + e_len + i] / gain;
  }
  return dec;
}

AudioBuffer render_reverberant(const AudioBuffer& speech,
                               const AudioBuffer& rir) {
  speech.validate("speech");
  rir.validate("rir");
  if (speech.sample_rate != rir.sample_rate) {
    throw std::invalid_argument("render_reverberant: sample rate mismatch");
  }
  auto wet = convolve(speech.samples, rir.samples, ConvolveMode::kTrimToSignal);
  return AudioBuffer(std::move(wet), speech.sample_rate);
}

AudioBuffer make_target(const AudioBuffer& speech, const Decomposition& dec,
                        const TargetSpec& spec) {
  speech.validate("speech");
  if (speech.sample_rate != dec.sample_rate) {
    throw std::invalid_argument("make_target: sample rate mismatch");
  }
  const size_t n = speech.size();

  if (spec.kind == TargetKind::kAnechoic) {
    return speech;
  }

  const size_t shift = std::min(dec.direct_index, n);
  AudioBuffer out;
  out.sample_rate = speech.sample_rate;

  if (spec.kind == TargetKind::kShiftedAnechoic) {
    out.samples.assign(n, 0.0);
    std::copy(speech.samples.begin(),
              speech.samples.begin() + static_cast<long>(n - shift),
              out.samples.begin() + static_cast<long>(shift));
    return out;
  }

  // Early-reflected: convolve with the leading window of the normalized
  // response. A 0 ms window keeps only the (unit) peak tap, which makes the
  // result identical to shifted_anechoic.
  const size_t want = early_len_for(spec.window_ms, dec.sample_rate);
  std::vector<double> kernel;
  kernel.reserve(want);
  for (size_t i = 0; i < want && i < dec.early.size(); ++i) {
    kernel.push_back(dec.early[i]);
  }
  for (size_t i = kernel.size(); i < want; ++i) {
    const size_t li = i - dec.early.size();
    if (li < dec.late.size()) kernel.push_back(dec.late[li]);
  }
  if (kernel.empty()) kernel.push_back(1.0);

  auto wet = convolve(speech.samples, kernel, ConvolveMode::kTrimToSignal);
  out.samples.assign(n, 0.0);
  std::copy(wet.begin(), wet.begin() + static_cast<long>(n - shift),
            out.samples.begin() + static_cast<long>(shift));
  return out;
}

}  // namespace uselab::rir

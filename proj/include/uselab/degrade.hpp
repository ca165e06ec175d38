// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uselab/audio.hpp"
#include "uselab/random_stream.hpp"
#include "uselab/rir.hpp"

namespace uselab::degrade {

// The seven supported degradation families.
inline const std::vector<std::string> kStepKinds = {
    "noise",  "reverb", "clipping", "bandwidth",
    "codec",  "packet_loss", "wind"};

// Mixes `noise` into `speech` at the requested SNR (dB, energy ratio).
// Noise is tiled/truncated to the speech length; when `stream` is given the
// tile starts at a random circular offset. Throws if the noise is silent.
AudioBuffer add_noise(const AudioBuffer& speech, const AudioBuffer& noise,
                      double snr_db, RandomStream* stream = nullptr,
                      nlohmann::json* info = nullptr);

// Hard-clips at threshold_ratio * max|speech| (ratio in (0, 1]).
AudioBuffer clip(const AudioBuffer& speech, double threshold_ratio);

// Linear-phase Kaiser FIR lowpass (8 ms support, group delay compensated).
// Cutoffs at or above 0.99 * Nyquist return the input unchanged.
AudioBuffer bandlimit(const AudioBuffer& speech, double cutoff_hz);

// Bit-depth reduction (2..16 bits), optionally through a mu-law companding
// (mu = 255) round trip.
AudioBuffer codec_crush(const AudioBuffer& speech, int bits,
                        bool mulaw = true);

struct LossModel {
  enum class Type { kBernoulli, kGilbert };
  Type type = Type::kBernoulli;
  double p_loss = 0.0;  // per-packet loss probability (stationary for gilbert)
  double p_stay = 0.0;  // gilbert: P(stay in the lossy state)

  static LossModel bernoulli(double p_loss);
  static LossModel gilbert(double p_loss, double p_stay);
};

// Zeroes whole packets of packet_ms. Returns the degraded audio and a
// per-packet loss mask.
std::pair<AudioBuffer, std::vector<uint8_t>> packet_loss(
    const AudioBuffer& speech, double packet_ms, const LossModel& model,
    RandomStream& stream);

// Adds synthetic wind: lowpassed Brownian noise shaped by a slow gust
// envelope, mixed at gain_db relative to the speech energy. -inf gain is an
// exact no-op.
AudioBuffer wind_noise(const AudioBuffer& speech, double gain_db,
                       RandomStream& stream, nlohmann::json* info = nullptr);

// --- recipes ------------------------------------------------------------

struct Step {
  std::string kind;          // one of kStepKinds
  nlohmann::json params;     // kind-specific parameters
};

struct Recipe {
  std::vector<Step> steps;

  nlohmann::json to_json() const;
  static Recipe from_json(const nlohmann::json& j);
};

// Named noise/rir assets, all at one sample rate per asset.
struct AssetBank {
  std::map<std::string, AudioBuffer> noises;
  std::map<std::string, AudioBuffer> rirs;

  const AudioBuffer& noise(const std::string& name) const;
  const AudioBuffer& rir(const std::string& name) const;
};

struct DegradedPair {
  AudioBuffer input;       // degraded signal
  AudioBuffer target;      // training target aligned with it
  nlohmann::json metadata; // realized parameters per step
};

// Applies the steps in order, drawing randomness from the per-item stream
// derived from (root_seed, item_id). At most one reverb step is allowed; the
// target is rebuilt from the clean signal using `target_spec` when reverb is
// present, otherwise the clean signal itself.
DegradedPair apply_recipe(const AudioBuffer& clean, const Recipe& recipe,
                          const AssetBank& bank, uint64_t root_seed,
                          const std::string& item_id,
                          const rir::TargetSpec& target_spec);

}  // namespace uselab::degrade

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <json.hpp>

#include "uselab/audio.hpp"

namespace uselab::metrics {

// Signal-to-distortion ratio in dB, capped at +100 (returned for vanishing
// residual). Throws on silent reference or length/rate mismatch.
double sdr_db(const AudioBuffer& reference, const AudioBuffer& estimate);

// Log-spectral distance in dB over rate-scaled spectrogram frames
// (power convention, epsilon-floored).
double lsd_db(const AudioBuffer& reference, const AudioBuffer& estimate);

// Mel-cepstral distortion over coefficients 1..13 from a 23-filter HTK-style
// mel bank; gain changes leave it at ~0 because c0 is excluded.
double mcd(const AudioBuffer& reference, const AudioBuffer& estimate);

// All three metrics as a JSON object.
nlohmann::json evaluate(const AudioBuffer& reference,
                        const AudioBuffer& estimate);

}  // namespace uselab::metrics

// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "uselab/audio.hpp"

namespace uselab {

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

WavEncoding wav_encoding_from_string(const std::string& name);
std::string to_string(WavEncoding enc);

// Reads a mono RIFF/WAVE file (PCM-16, PCM-24 or IEEE float32). Integer
// samples are mapped to [-1, 1) by dividing by 2^(bits-1). Throws IoError if
// the file cannot be opened and std::invalid_argument on malformed headers,
// unsupported encodings or channel counts != 1.
AudioBuffer read_wav(const std::string& path);

// Writes `buf` with the requested encoding. For integer encodings samples are
// clamped to [-1, 1] first; the number of clamped samples is returned (always
// 0 for float32).
size_t write_wav(const AudioBuffer& buf, const std::string& path,
                 WavEncoding enc = WavEncoding::kFloat32);

}  // namespace uselab

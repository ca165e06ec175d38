// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace uselab {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

uint32_t rd_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 4);
}

void wr_u16(std::ofstream& f, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 2);
}

struct FmtInfo {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

}  // namespace

WavEncoding wav_encoding_from_string(const std::string& name) {
  if (name == "pcm16") return WavEncoding::kPcm16;
  if (name == "pcm24") return WavEncoding::kPcm24;
  if (name == "float32") return WavEncoding::kFloat32;
  throw std::invalid_argument("unknown wav encoding: " + name);
}

std::string to_string(WavEncoding enc) {
  switch (enc) {
    case WavEncoding::kPcm16: return "pcm16";
    case WavEncoding::kPcm24: return "pcm24";
    case WavEncoding::kFloat32: return "float32";
  }
  return "?";
}

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav file: " + path);

  unsigned char hdr[12];
  if (!f.read(reinterpret_cast<char*>(hdr), 12) ||
      std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    throw std::invalid_argument("malformed wav header: " + path);
  }

  FmtInfo fmt;
  bool have_fmt = false;
  std::vector<unsigned char> data;
  bool have_data = false;

  // Walk chunks; unknown ones are skipped (chunks are word-aligned).
  unsigned char ch[8];
  while (f.read(reinterpret_cast<char*>(ch), 8)) {
    const uint32_t sz = rd_u32(ch + 4);
    if (std::memcmp(ch, "fmt ", 4) == 0) {
      if (sz < 16) throw std::invalid_argument("malformed fmt chunk: " + path);
      std::vector<unsigned char> body(sz);
      if (!f.read(reinterpret_cast<char*>(body.data()), sz)) {
        throw std::invalid_argument("truncated fmt chunk: " + path);
      }
      fmt.format = rd_u16(body.data());
      fmt.channels = rd_u16(body.data() + 2);
      fmt.sample_rate = rd_u32(body.data() + 4);
      fmt.bits = rd_u16(body.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(ch, "data", 4) == 0) {
      data.resize(sz);
      if (!f.read(reinterpret_cast<char*>(data.data()), sz)) {
        throw std::invalid_argument("truncated data chunk: " + path);
      }
      have_data = true;
    } else {
      f.seekg(sz, std::ios::cur);
    }
    if (sz & 1) f.seekg(1, std::ios::cur);  // pad byte
  }

  if (!have_fmt || !have_data) {
    throw std::invalid_argument("wav missing fmt or data chunk: " + path);
  }
  if (fmt.channels != 1) {
    throw std::invalid_argument("only mono wav supported, got " +
                                std::to_string(fmt.channels) + " channels: " +
                                path);
  }

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(fmt.sample_rate);

  if (fmt.format == kFormatPcm && fmt.bits == 16) {
    const size_t n = data.size() / 2;
    buf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const int16_t v = static_cast<int16_t>(
          static_cast<uint16_t>(data[2 * i] | (data[2 * i + 1] << 8)));
      buf.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (fmt.format == kFormatPcm && fmt.bits == 24) {
    const size_t n = data.size() / 3;
    buf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int32_t v = static_cast<int32_t>(data[3 * i]) |
                  (static_cast<int32_t>(data[3 * i + 1]) << 8) |
                  (static_cast<int32_t>(data[3 * i + 2]) << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
      buf.samples[i] = static_cast<double>(v) / 8388608.0;
    }
  } else if (fmt.format == kFormatFloat && fmt.bits == 32) {
    const size_t n = data.size() / 4;
    buf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const uint32_t u = rd_u32(data.data() + 4 * i);
      float fv;
      std::memcpy(&fv, &u, 4);
      buf.samples[i] = static_cast<double>(fv);
    }
  } else {
    throw std::invalid_argument(
        "unsupported wav encoding (format " + std::to_string(fmt.format) +
        ", " + std::to_string(fmt.bits) + " bit): " + path);
  }
  return buf;
}

size_t write_wav(const AudioBuffer& buf, const std::string& path,
                 WavEncoding enc) {
  buf.validate("write_wav");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav file for writing: " + path);

  const uint16_t bits = enc == WavEncoding::kPcm16   ? 16
                        : enc == WavEncoding::kPcm24 ? 24
                                                     : 32;
  const uint16_t bytes = bits / 8;
  const uint16_t format =
      enc == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm;
  const uint32_t n = static_cast<uint32_t>(buf.samples.size());
  const uint32_t data_size = n * bytes;

  f.write("RIFF", 4);
  wr_u32(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, format);
  wr_u16(f, 1);  // mono
  wr_u32(f, static_cast<uint32_t>(buf.sample_rate));
  wr_u32(f, static_cast<uint32_t>(buf.sample_rate) * bytes);
  wr_u16(f, bytes);
  wr_u16(f, bits);
  f.write("data", 4);
  wr_u32(f, data_size);

  size_t clamped = 0;
  if (enc == WavEncoding::kFloat32) {
    for (double s : buf.samples) {
      const float fv = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      wr_u32(f, u);
    }
  } else {
    const double scale = enc == WavEncoding::kPcm16 ? 32768.0 : 8388608.0;
    const int64_t lo = -static_cast<int64_t>(scale);
    const int64_t hi = static_cast<int64_t>(scale) - 1;
    for (double s : buf.samples) {
      if (s < -1.0 || s > 1.0) {
        ++clamped;
        s = std::clamp(s, -1.0, 1.0);
      }
      int64_t q = llround(s * scale);
      q = std::clamp(q, lo, hi);
      if (enc == WavEncoding::kPcm16) {
        wr_u16(f, static_cast<uint16_t>(static_cast<int16_t>(q)));
      } else {
        const uint32_t u = static_cast<uint32_t>(q) & 0xFFFFFF;
        unsigned char b[3] = {static_cast<unsigned char>(u & 0xff),
                              static_cast<unsigned char>((u >> 8) & 0xff),
                              static_cast<unsigned char>((u >> 16) & 0xff)};
        f.write(reinterpret_cast<char*>(b), 3);
      }
    }
  }
  if ((data_size & 1) != 0) f.put(0);
  if (!f) throw IoError("failed to write wav file: " + path);
  return clamped;
}

}  // namespace uselab

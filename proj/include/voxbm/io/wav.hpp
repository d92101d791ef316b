/*
 * Copyright 2026 The voxbm Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// RIFF/WAVE reader and writer. Reads integer PCM (8/16/24/32 bit) and IEEE
// float (32/64 bit), including WAVE_FORMAT_EXTENSIBLE headers; multichannel
// input is downmixed to mono by averaging. Writes 16-bit PCM or 32-bit float.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::io {

namespace detail {

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(tag[i]));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
};

inline dsp::Waveform decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info = nullptr) {
  using detail::read_u16;
  using detail::read_u32;
  auto bad = [](const std::string& why) { fail(ErrorCode::kBadAudioFormat, why); };

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }

  WavInfo fmt;
  std::uint16_t format = 0;
  std::uint16_t block_align = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) bad("truncated fmt chunk");
      format = read_u16(bytes, body);
      fmt.channels = read_u16(bytes, body + 2);
      fmt.sample_rate = static_cast<int>(read_u32(bytes, body + 4));
      block_align = read_u16(bytes, body + 12);
      fmt.bits_per_sample = read_u16(bytes, body + 14);
      if (format == detail::kFormatExtensible) {
        if (size < 40) bad("truncated WAVE_FORMAT_EXTENSIBLE header");
        format = read_u16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      // Streaming writers sometimes leave the size at 0 or 0xFFFFFFFF.
      const std::size_t len = (size == 0 || size > avail) ? avail : size;
      data = bytes.subspan(body, len);
      have_data = true;
    }
    pos = body + static_cast<std::size_t>(size) + (size & 1u);
    if (have_data && have_fmt) break;
  }
  if (!have_fmt) bad("missing fmt chunk");
  if (!have_data) bad("missing data chunk");
  if (fmt.channels < 1) bad("zero channels");
  if (fmt.sample_rate <= 0) bad("invalid sample rate");

  fmt.is_float = format == detail::kFormatFloat;
  if (format != detail::kFormatPcm && format != detail::kFormatFloat) bad("unsupported sample format");
  const int bytes_per_sample = fmt.bits_per_sample / 8;
  if (fmt.is_float ? (fmt.bits_per_sample != 32 && fmt.bits_per_sample != 64)
                   : (fmt.bits_per_sample != 8 && fmt.bits_per_sample != 16 &&
                      fmt.bits_per_sample != 24 && fmt.bits_per_sample != 32)) {
    bad("unsupported bit depth " + std::to_string(fmt.bits_per_sample));
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(bytes_per_sample) * static_cast<std::size_t>(fmt.channels);
  if (block_align != 0 && block_align != frame_bytes) bad("inconsistent block alignment");

  const std::size_t frames = data.size() / frame_bytes;
  std::vector<double> mono(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < fmt.channels; ++c) {
      const std::size_t off = f * frame_bytes + static_cast<std::size_t>(c * bytes_per_sample);
      const std::uint8_t* p = data.data() + off;
      double v = 0.0;
      if (fmt.is_float) {
        if (bytes_per_sample == 4) {
          float x;
          std::memcpy(&x, p, 4);
          v = x;
        } else {
          double x;
          std::memcpy(&x, p, 8);
          v = x;
        }
      } else {
        switch (bytes_per_sample) {
          case 1: v = (static_cast<int>(p[0]) - 128) / 128.0; break;
          case 2: v = static_cast<std::int16_t>(p[0] | (p[1] << 8)) / 32768.0; break;
          case 3: {
            std::int32_t x = p[0] | (p[1] << 8) | (p[2] << 16);
            if (x & 0x800000) x |= ~0xFFFFFF;
            v = x / 8388608.0;
            break;
          }
          default: {
            std::int32_t x;
            std::memcpy(&x, p, 4);
            v = x / 2147483648.0;
          }
        }
      }
      if (!std::isfinite(v)) bad("non-finite sample");
      acc += v;
    }
    mono[f] = acc / fmt.channels;
  }
  if (info) *info = fmt;
  return dsp::Waveform{std::move(mono), fmt.sample_rate};
}

enum class WavEncoding { kPcm16, kFloat32 };

inline std::vector<std::uint8_t> encode_wav(const dsp::Waveform& w, WavEncoding enc = WavEncoding::kPcm16) {
  using namespace detail;
  const std::uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * (bits / 8));
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, enc == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    if (enc == WavEncoding::kPcm16) {
      const double c = std::clamp(s, -1.0, 1.0);
      const auto v = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
      put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      const auto f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kStorageError, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kStorageError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kStorageError, "short write to " + path);
}

inline dsp::Waveform read_wav(const std::string& path) { return decode_wav(read_file_bytes(path)); }

inline void write_wav(const std::string& path, const dsp::Waveform& w, WavEncoding enc = WavEncoding::kPcm16) {
  write_file_bytes(path, encode_wav(w, enc));
}

}  // namespace voxbm::io

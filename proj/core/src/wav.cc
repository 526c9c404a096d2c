// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "dccrgan/error.h"

namespace dccrgan {

namespace {

std::uint32_t u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}
std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::vector<unsigned char>& o, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put16(std::vector<unsigned char>& o, std::uint16_t v) {
  o.push_back(static_cast<unsigned char>(v));
  o.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

WavData parse_wav(std::span<const unsigned char> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw ParseError("wav: missing RIFF/WAVE header");
  }
  bool have_fmt = false;
  WavData out;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const unsigned char* chunk = b.data() + pos;
    const std::uint32_t size = u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > b.size() - body) {
      throw ParseError("wav: chunk '" + std::string(reinterpret_cast<const char*>(chunk), 4) +
                       "' runs past end of file");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError("wav: fmt chunk too short");
      const unsigned char* f = b.data() + body;
      const std::uint16_t format = u16(f);
      const std::uint16_t channels = u16(f + 2);
      const std::uint32_t rate = u32(f + 4);
      const std::uint16_t bits = u16(f + 14);
      if (format != 1) throw ParseError("wav: unsupported format code " + std::to_string(format) + " (PCM only)");
      if (channels != 1) throw ParseError("wav: " + std::to_string(channels) + " channels (mono only)");
      if (bits != 16) throw ParseError("wav: " + std::to_string(bits) + "-bit samples (16-bit only)");
      if (rate != kSampleRate) {
        throw ParseError("wav: sample rate " + std::to_string(rate) + " Hz (16000 only, no resampling)");
      }
      out.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("wav: data chunk before fmt chunk");
      if (size % 2 != 0) throw ParseError("wav: odd data chunk size for 16-bit samples");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(u16(b.data() + body + 2 * i));
        out.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw ParseError(have_fmt ? "wav: no data chunk" : "wav: no fmt chunk");
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> encode_wav(std::span<const float> samples) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<unsigned char> o;
  o.reserve(44 + data_bytes);
  o.insert(o.end(), {'R', 'I', 'F', 'F'});
  put32(o, 36 + data_bytes);
  o.insert(o.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(o, 16);
  put16(o, 1);
  put16(o, 1);
  put32(o, kSampleRate);
  put32(o, kSampleRate * 2);
  put16(o, 2);
  put16(o, 16);
  o.insert(o.end(), {'d', 'a', 't', 'a'});
  put32(o, data_bytes);
  for (float s : samples) {
    double v = std::round(static_cast<double>(s) * 32768.0);  // halves round away from zero
    v = std::clamp(v, -32768.0, 32767.0);
    put16(o, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return o;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples) {
  const auto bytes = encode_wav(samples);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("wav: cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("wav: write to " + path.string() + " failed");
}

}  // namespace dccrgan

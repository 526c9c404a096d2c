// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_WAV_H_
#define DCCRGAN_WAV_H_

#include <filesystem>
#include <span>
#include <vector>

namespace dccrgan {

inline constexpr int kSampleRate = 16000;

struct WavData {
  std::vector<float> samples;  // in [-1, 1)
  int sample_rate = kSampleRate;
};

/// RIFF/WAVE PCM16 mono at 16 kHz; samples are divided by 32768.
/// ParseError for malformed or unsupported files, IoError if unreadable.
WavData read_wav(const std::filesystem::path& path);
WavData parse_wav(std::span<const unsigned char> bytes);

/// PCM16 mono 16 kHz; round half away from zero after scaling by 32768,
/// clipped to [-32768, 32767].
void write_wav(const std::filesystem::path& path, std::span<const float> samples);
std::vector<unsigned char> encode_wav(std::span<const float> samples);

}  // namespace dccrgan

#endif  // DCCRGAN_WAV_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "dccrgan/data.h"
#include "dccrgan/error.h"
#include "dccrgan/wav.h"

namespace dccrgan {
namespace {

namespace fs = std::filesystem;

void put(std::vector<unsigned char>& b, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_tag(std::vector<unsigned char>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

std::vector<unsigned char> wav_bytes(const std::vector<std::int16_t>& s, std::uint32_t rate = 16000,
                                     std::uint16_t channels = 1, std::uint16_t bits = 16) {
  std::vector<unsigned char> b;
  put_tag(b, "RIFF");
  put(b, 36 + 2 * s.size(), 4);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put(b, 16, 4);
  put(b, 1, 2);
  put(b, channels, 2);
  put(b, rate, 4);
  put(b, rate * channels * bits / 8, 4);
  put(b, channels * bits / 8, 2);
  put(b, bits, 2);
  put_tag(b, "data");
  put(b, 2 * s.size(), 4);
  for (auto v : s) put(b, static_cast<std::uint16_t>(v), 2);
  return b;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("dccrgan_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST(Wav, EncodesCanonicalHeader) {
  const std::vector<float> x{0.0f, 0.5f, -1.0f, 1.0f, -0.25f / 32768};
  // 1.0 clips to 32767; -0.25 LSB rounds to 0.
  EXPECT_EQ(encode_wav(x), wav_bytes({0, 16384, -32768, 32767, 0}));
}

TEST(Wav, ParsesHandBuiltBytes) {
  const auto w = parse_wav(wav_bytes({0, 16384, -32768, 1}));
  ASSERT_EQ(w.samples.size(), 4u);
  EXPECT_EQ(w.samples[1], 0.5f);
  EXPECT_EQ(w.samples[2], -1.0f);
  EXPECT_EQ(w.samples[3], 1.0f / 32768);
  EXPECT_EQ(w.sample_rate, 16000);
}

TEST(Wav, SkipsUnknownChunks) {
  auto b = wav_bytes({7, -7});
  std::vector<unsigned char> list;
  put_tag(list, "LIST");
  put(list, 3, 4);
  list.insert(list.end(), {'a', 'b', 'c', 0});  // odd chunk padded
  b.insert(b.begin() + 36, list.begin(), list.end());
  const auto w = parse_wav(b);
  ASSERT_EQ(w.samples.size(), 2u);
  EXPECT_EQ(w.samples[0], 7.0f / 32768);
}

TEST(Wav, RejectsUnsupported) {
  EXPECT_THROW(parse_wav(wav_bytes({1}, 8000)), ParseError);
  EXPECT_THROW(parse_wav(wav_bytes({1, 2}, 16000, 2)), ParseError);
  auto b = wav_bytes({1, 2, 3});
  b.resize(b.size() - 3);
  EXPECT_THROW(parse_wav(b), ParseError);
  b = wav_bytes({1});
  b[0] = 'X';
  EXPECT_THROW(parse_wav(b), ParseError);
  EXPECT_THROW(read_wav("/nonexistent/x.wav"), IoError);
}

TEST(Wav, RoundTripWithinOneStep) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-0.99f, 0.99f);
  std::vector<float> x(5000);
  for (auto& v : x) v = u(rng);
  const fs::path p = temp_dir("wav") / "x.wav";
  write_wav(p, x);
  const auto back = read_wav(p).samples;
  ASSERT_EQ(back.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(back[i] - x[i]), 0.5f / 32768 + 1e-9f);
}

double power(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

TEST(Synthesis, CleanSignalShape) {
  const auto p = synth_clean_params(4, 16000);
  EXPECT_GE(p.f0, 100);
  EXPECT_LE(p.f0, 300);
  EXPECT_GE(p.amplitude.size(), 3u);
  EXPECT_LE(p.amplitude.size(), 8u);
  const auto x = synth_clean(4, 16000);
  ASSERT_EQ(x.size(), 16000u);
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 0.5, 1e-12);
  for (std::size_t i = 0; i < p.lead; ++i) EXPECT_EQ(x[i], 0.0);
  for (std::size_t i = 0; i < p.trail; ++i) EXPECT_EQ(x[x.size() - 1 - i], 0.0);
  EXPECT_EQ(synth_clean(4, 16000), x);
}

TEST(Synthesis, NoiseTypesAreDistinctAndDisjoint) {
  std::set<std::string> train, test;
  for (auto t : train_noise_types()) train.insert(noise_type_name(t));
  for (auto t : test_noise_types()) test.insert(noise_type_name(t));
  for (const auto& n : train) EXPECT_EQ(test.count(n), 0u) << n;
  for (auto t : train_noise_types()) {
    const auto n = synth_noise(t, 3, 8000);
    EXPECT_GT(power(n), 0.0);
    EXPECT_EQ(n, synth_noise(t, 3, 8000));
  }
}

TEST(Synthesis, MixHitsRequestedSnr) {
  const auto c = synth_clean(5, 12000);
  for (auto t : test_noise_types()) {
    for (double snr : {-5.0, 0.0, 7.5, 20.0}) {
      const auto y = mix_at_snr(c, synth_noise(t, 6, 12000), snr);
      EXPECT_NEAR(measured_snr(c, y), snr, 1e-9) << noise_type_name(t);
    }
  }
  const std::vector<double> zero(12000, 0.0);
  EXPECT_THROW(mix_at_snr(c, zero, 5), DegenerateInputError);
  EXPECT_THROW(mix_at_snr(zero, c, 5), DegenerateInputError);
  EXPECT_THROW(mix_at_snr(c, std::vector<double>(100, 1.0), 5), DimensionError);
}

TEST(Corpus, DeterministicBalancedAndAccurate) {
  CorpusSpec spec;
  spec.n_train = 24;
  spec.n_test = 8;
  spec.seed = 9;
  const Corpus a = generate_corpus(spec), b = generate_corpus(spec);
  ASSERT_EQ(a.train.size(), 24u);
  ASSERT_EQ(a.test.size(), 8u);
  std::map<double, int> per_snr;
  std::set<std::string> train_types;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].noisy, b.train[i].noisy);
    const auto& u = a.train[i];
    ++per_snr[u.snr_db];
    train_types.insert(u.noise_type);
    EXPECT_GE(u.clean.size(), spec.min_len);
    EXPECT_LE(u.clean.size(), spec.max_len);
    std::vector<double> c(u.clean.begin(), u.clean.end()), n(u.noisy.begin(), u.noisy.end());
    EXPECT_NEAR(measured_snr(c, n), u.snr_db, 0.01) << u.id;
  }
  EXPECT_EQ(per_snr, (std::map<double, int>{{0, 6}, {5, 6}, {10, 6}, {15, 6}}));
  for (const auto& u : a.test) {
    EXPECT_EQ(train_types.count(u.noise_type), 0u);
    EXPECT_NE(std::find(spec.test_snrs.begin(), spec.test_snrs.end(), u.snr_db), spec.test_snrs.end());
  }
  spec.seed = 10;
  EXPECT_NE(generate_corpus(spec).train[0].noisy, a.train[0].noisy);
}

TEST(Corpus, WritesReadableManifest) {
  CorpusSpec spec;
  spec.n_train = 4;
  spec.n_test = 2;
  spec.seed = 2;
  const Corpus c = generate_corpus(spec);
  const fs::path dir = temp_dir("corpus");
  write_corpus(c, dir);
  const auto entries = read_manifest(dir / "train.tsv");
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].id, c.train[0].id);
  EXPECT_EQ(entries[0].clean_path, dir / "train" / "clean" / (c.train[0].id + ".wav"));
  const auto utts = load_manifest(dir / "test.tsv");
  ASSERT_EQ(utts.size(), 2u);
  EXPECT_EQ(utts[1].noisy.size(), c.test[1].noisy.size());
  std::vector<double> cl(utts[1].clean.begin(), utts[1].clean.end()),
      no(utts[1].noisy.begin(), utts[1].noisy.end());
  EXPECT_NEAR(measured_snr(cl, no), c.test[1].snr_db, 0.05);
  fs::remove_all(dir);
}

TEST(Manifest, ParsesAndRejects) {
  const fs::path dir = temp_dir("manifest");
  {
    std::ofstream f(dir / "m.tsv");
    f << "# comment\n\nu1\tc/a.wav\tn/a.wav\t2.5\r\n";
  }
  const auto e = read_manifest(dir / "m.tsv");
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].id, "u1");
  EXPECT_EQ(e[0].noisy_path, dir / "n/a.wav");
  EXPECT_EQ(e[0].snr_db, 2.5);
  {
    std::ofstream f(dir / "bad.tsv");
    f << "u1\tc.wav\tn.wav\n";
  }
  EXPECT_THROW(read_manifest(dir / "bad.tsv"), ParseError);
  {
    std::ofstream f(dir / "bad.tsv");
    f << "u1\tc.wav\tn.wav\t5dB\n";
  }
  EXPECT_THROW(read_manifest(dir / "bad.tsv"), ParseError);
  EXPECT_THROW(read_manifest(dir / "missing.tsv"), IoError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dccrgan

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dccrgan/data.h"
#include "dccrgan/error.h"
#include "dccrgan/wav.h"

namespace dccrgan {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRate = kSampleRate;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<double> gaussian(Rng& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

// RBJ cookbook biquad, direct form I.
struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad make(double b0, double b1, double b2, double a0, double a1, double a2) {
    return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
  }
  static Biquad bandpass(double fc, double q) {
    const double w = kTwoPi * fc / kRate, alpha = std::sin(w) / (2 * q);
    return make(alpha, 0, -alpha, 1 + alpha, -2 * std::cos(w), 1 - alpha);
  }
  static Biquad highpass(double fc, double q) {
    const double w = kTwoPi * fc / kRate, alpha = std::sin(w) / (2 * q), c = std::cos(w);
    return make((1 + c) / 2, -(1 + c), (1 + c) / 2, 1 + alpha, -2 * c, 1 - alpha);
  }
  static Biquad notch(double fc, double q) {
    const double w = kTwoPi * fc / kRate, alpha = std::sin(w) / (2 * q), c = std::cos(w);
    return make(1, -2 * c, 1, 1 + alpha, -2 * c, 1 - alpha);
  }

  std::vector<double> run(const std::vector<double>& x) const {
    std::vector<double> y(x.size());
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      y[n] = b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = x[n];
      y2 = y1;
      y1 = y[n];
    }
    return y;
  }
};

double power(std::span<const double> x) {
  double p = 0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

// 0 inside [begin, begin + len), 1 elsewhere, with raised-cosine edges.
double gate(std::size_t n, std::size_t begin, std::size_t len, std::size_t ramp) {
  if (len == 0) return 1.0;
  const std::size_t end = begin + len;
  if (n >= begin && n < end) return 0.0;
  const double d = n < begin ? static_cast<double>(begin - n) : static_cast<double>(n - end + 1);
  if (d >= static_cast<double>(ramp)) return 1.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * d / static_cast<double>(ramp));
}

std::string format_snr(double snr) {
  std::ostringstream s;
  s << snr;
  return s.str();
}

}  // namespace

CleanParams synth_clean_params(std::uint64_t seed, std::size_t length) {
  Rng rng(seed);
  CleanParams p;
  p.f0 = uniform(rng, 100.0, 300.0);
  const std::size_t harmonics = uniform_index(rng, 3, 8);
  const double decay = uniform(rng, 0.5, 0.85);
  for (std::size_t h = 0; h < harmonics; ++h) {
    p.amplitude.push_back(std::pow(decay, static_cast<double>(h)));
    p.phase.push_back(uniform(rng, 0.0, kTwoPi));
  }
  p.env_rate = uniform(rng, 0.5, 3.0);
  p.env_phase = uniform(rng, 0.0, kTwoPi);
  p.lead = uniform_index(rng, 0, length / 10);
  p.trail = uniform_index(rng, 0, length / 10);
  p.gap_len = uniform_index(rng, length / 40, length / 15);
  const std::size_t mid_lo = length / 3, mid_hi = 2 * length / 3 - p.gap_len;
  p.gap_begin = uniform_index(rng, mid_lo, std::max(mid_lo, mid_hi));
  return p;
}

std::vector<double> synth_clean(std::uint64_t seed, std::size_t length) {
  if (length < 400) {
    throw LengthError("synth_clean: length " + std::to_string(length) + " below 400 samples");
  }
  const CleanParams p = synth_clean_params(seed, length);
  const std::size_t ramp = 80;
  std::vector<double> x(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / kRate;
    double s = 0;
    for (std::size_t h = 0; h < p.amplitude.size(); ++h) {
      s += p.amplitude[h] * std::sin(kTwoPi * static_cast<double>(h + 1) * p.f0 * t + p.phase[h]);
    }
    const double env = 0.55 + 0.45 * std::sin(kTwoPi * p.env_rate * t + p.env_phase);
    const double g = gate(n, 0, p.lead, ramp) * gate(n, length - p.trail, p.trail, ramp) *
                     gate(n, p.gap_begin, p.gap_len, ramp);
    x[n] = s * env * g;
  }
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.5 / peak;
  return x;
}

const char* noise_type_name(NoiseType t) {
  switch (t) {
    case NoiseType::white: return "white";
    case NoiseType::pink: return "pink";
    case NoiseType::bandpass: return "bandpass";
    case NoiseType::modulated: return "modulated";
    case NoiseType::impulsive: return "impulsive";
    case NoiseType::chirp: return "chirp";
    case NoiseType::highpass: return "highpass";
    case NoiseType::bandstop: return "bandstop";
  }
  return "?";
}

const std::vector<NoiseType>& train_noise_types() {
  static const std::vector<NoiseType> types{NoiseType::white, NoiseType::pink, NoiseType::bandpass};
  return types;
}

const std::vector<NoiseType>& test_noise_types() {
  static const std::vector<NoiseType> types{NoiseType::modulated, NoiseType::impulsive,
                                            NoiseType::chirp, NoiseType::highpass,
                                            NoiseType::bandstop};
  return types;
}

std::vector<double> synth_noise(NoiseType type, std::uint64_t seed, std::size_t length) {
  Rng rng(seed);
  switch (type) {
    case NoiseType::white:
      return gaussian(rng, length);
    case NoiseType::pink: {
      // Paul Kellet's refined pinking filter.
      auto w = gaussian(rng, length);
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      for (double& x : w) {
        const double v = x;
        b0 = 0.99886 * b0 + v * 0.0555179;
        b1 = 0.99332 * b1 + v * 0.0750759;
        b2 = 0.96900 * b2 + v * 0.1538520;
        b3 = 0.86650 * b3 + v * 0.3104856;
        b4 = 0.55000 * b4 + v * 0.5329522;
        b5 = -0.7616 * b5 - v * 0.0168980;
        x = b0 + b1 + b2 + b3 + b4 + b5 + b6 + v * 0.5362;
        b6 = v * 0.115926;
      }
      return w;
    }
    case NoiseType::bandpass: {
      const double fc = uniform(rng, 400.0, 3000.0), q = uniform(rng, 0.7, 2.0);
      return Biquad::bandpass(fc, q).run(gaussian(rng, length));
    }
    case NoiseType::modulated: {
      const double fm = uniform(rng, 2.0, 8.0), ph = uniform(rng, 0.0, kTwoPi);
      auto w = gaussian(rng, length);
      for (std::size_t n = 0; n < length; ++n) {
        w[n] *= 0.5 + 0.5 * std::sin(kTwoPi * fm * static_cast<double>(n) / kRate + ph);
      }
      return w;
    }
    case NoiseType::impulsive: {
      auto w = gaussian(rng, length);
      std::vector<double> out(length);
      for (std::size_t n = 0; n < length; ++n) out[n] = 0.05 * w[n];
      std::size_t n = uniform_index(rng, 0, 1500);
      while (n < length) {
        const std::size_t len = uniform_index(rng, 80, 400);
        const double amp = uniform(rng, 0.5, 1.5);
        for (std::size_t k = 0; k < len && n + k < length; ++k) {
          out[n + k] += amp * w[n + k] * std::exp(-5.0 * static_cast<double>(k) / static_cast<double>(len)) * 4.0;
        }
        n += len + uniform_index(rng, 800, 3000);
      }
      return out;
    }
    case NoiseType::chirp: {
      const double f1 = uniform(rng, 200.0, 1000.0), f2 = uniform(rng, 2000.0, 6000.0);
      const double period = uniform(rng, 0.3, 0.8) * kRate;
      auto w = gaussian(rng, length);
      std::vector<double> out(length);
      double phase = 0;
      for (std::size_t n = 0; n < length; ++n) {
        const double frac = std::fmod(static_cast<double>(n), period) / period;
        phase += kTwoPi * (f1 + (f2 - f1) * frac) / kRate;
        out[n] = std::sin(phase) + 0.1 * w[n];
      }
      return out;
    }
    case NoiseType::highpass: {
      const double fc = uniform(rng, 1500.0, 4000.0);
      return Biquad::highpass(fc, std::numbers::sqrt2 / 2).run(gaussian(rng, length));
    }
    case NoiseType::bandstop: {
      const double fc = uniform(rng, 500.0, 3000.0);
      return Biquad::notch(fc, 0.3).run(gaussian(rng, length));
    }
  }
  throw ContractError("synth_noise: invalid noise type");
}

std::vector<double> mix_at_snr(std::span<const double> clean, std::span<const double> noise,
                               double snr_db) {
  if (clean.size() != noise.size()) {
    throw DimensionError("mix_at_snr: clean has " + std::to_string(clean.size()) +
                         " samples, noise " + std::to_string(noise.size()));
  }
  if (clean.empty()) throw DegenerateInputError("mix_at_snr: empty input");
  const double pc = power(clean), pn = power(noise);
  if (pc == 0) throw DegenerateInputError("mix_at_snr: clean signal is all zero");
  if (pn == 0) throw DegenerateInputError("mix_at_snr: noise is all zero");
  const double g = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) out[i] = clean[i] + g * noise[i];
  return out;
}

double measured_snr(std::span<const double> clean, std::span<const double> noisy) {
  if (clean.size() != noisy.size() || clean.empty()) {
    throw DimensionError("measured_snr: length mismatch");
  }
  double pc = 0, pn = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    pc += clean[i] * clean[i];
    const double d = noisy[i] - clean[i];
    pn += d * d;
  }
  return 10.0 * std::log10(pc / pn);
}

void CorpusSpec::validate() const {
  if (train_snrs.empty() || test_snrs.empty()) throw ConfigError("corpus: SNR lists must be non-empty");
  for (double a : train_snrs) {
    for (double b : test_snrs) {
      if (a == b) throw ConfigError("corpus: train and test SNR sets must be disjoint");
    }
  }
  if (min_len < 400 || max_len < min_len) {
    throw ConfigError("corpus: need 400 <= min_len <= max_len");
  }
}

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Corpus corpus;
  auto make = [&](std::size_t global, std::size_t local, bool train) {
    Rng rng(spec.seed ^ static_cast<std::uint64_t>(global));
    const std::size_t len = uniform_index(rng, spec.min_len, spec.max_len);
    const std::uint64_t clean_seed = rng(), noise_seed = rng();
    const auto& snrs = train ? spec.train_snrs : spec.test_snrs;
    const auto& types = train ? train_noise_types() : test_noise_types();
    const double snr = snrs[local % snrs.size()];
    const NoiseType type = types[(local / snrs.size()) % types.size()];
    const auto clean = synth_clean(clean_seed, len);
    const auto noisy = mix_at_snr(clean, synth_noise(type, noise_seed, len), snr);
    char id[32];
    std::snprintf(id, sizeof id, "%s_%04zu", train ? "train" : "test", local);
    return Utterance{id, std::vector<float>(clean.begin(), clean.end()),
                     std::vector<float>(noisy.begin(), noisy.end()), snr, noise_type_name(type)};
  };
  for (std::size_t i = 0; i < spec.n_train; ++i) corpus.train.push_back(make(i, i, true));
  for (std::size_t i = 0; i < spec.n_test; ++i) {
    corpus.test.push_back(make(spec.n_train + i, i, false));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto write_split = [&](const std::vector<Utterance>& utts, const std::string& split) {
    fs::create_directories(dir / split / "clean");
    fs::create_directories(dir / split / "noisy");
    std::vector<ManifestEntry> entries;
    for (const auto& u : utts) {
      float peak = 0;
      for (float v : u.noisy) peak = std::max(peak, std::abs(v));
      const float scale = peak > 0.99f ? 0.99f / peak : 1.0f;
      std::vector<float> c(u.clean), n(u.noisy);
      for (auto& v : c) v *= scale;
      for (auto& v : n) v *= scale;
      const fs::path cp = fs::path(split) / "clean" / (u.id + ".wav");
      const fs::path np = fs::path(split) / "noisy" / (u.id + ".wav");
      write_wav(dir / cp, c);
      write_wav(dir / np, n);
      entries.push_back({u.id, cp, np, u.snr_db});
    }
    write_manifest(dir / (split + ".tsv"), entries);
  };
  write_split(corpus.train, "train");
  write_split(corpus.test, "test");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("manifest: cannot open " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4) {
      throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) + ": expected 4 " +
                       "tab-separated fields, got " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.id = fields[0];
    e.clean_path = base / fields[1];
    e.noisy_path = base / fields[2];
    try {
      std::size_t used = 0;
      e.snr_db = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) +
                       ": bad snr_db '" + fields[3] + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("manifest: cannot open " + path.string() + " for writing");
  for (const auto& e : entries) {
    f << e.id << '\t' << e.clean_path.generic_string() << '\t' << e.noisy_path.generic_string()
      << '\t' << format_snr(e.snr_db) << '\n';
  }
  if (!f) throw IoError("manifest: write to " + path.string() + " failed");
}

std::vector<Utterance> load_manifest(const std::filesystem::path& path) {
  std::vector<Utterance> out;
  for (const auto& e : read_manifest(path)) {
    Utterance u;
    u.id = e.id;
    u.clean = read_wav(e.clean_path).samples;
    u.noisy = read_wav(e.noisy_path).samples;
    u.snr_db = e.snr_db;
    if (u.clean.size() != u.noisy.size()) {
      throw DimensionError("manifest entry " + e.id + ": clean and noisy lengths differ");
    }
    if (u.clean.size() < 400) {
      throw LengthError("manifest entry " + e.id + ": shorter than 400 samples");
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace dccrgan

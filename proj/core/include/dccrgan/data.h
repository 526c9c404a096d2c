// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_DATA_H_
#define DCCRGAN_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dccrgan {

/// Parameters drawn for one synthetic utterance.
struct CleanParams {
  double f0 = 0;                  // Hz, constant over the utterance
  std::vector<double> amplitude;  // per harmonic, decaying
  std::vector<double> phase;
  double env_rate = 0;            // Hz
  double env_phase = 0;
  std::size_t lead = 0, trail = 0;  // silent samples at either end
  std::size_t gap_begin = 0, gap_len = 0;
};

CleanParams synth_clean_params(std::uint64_t seed, std::size_t length);

/// Harmonic tone complex (f0 in 100-300 Hz, 3-8 harmonics) under a slow
/// amplitude envelope with leading, trailing and internal silences. Peak 0.5.
std::vector<double> synth_clean(std::uint64_t seed, std::size_t length);

enum class NoiseType {
  // training
  white,
  pink,
  bandpass,
  // test
  modulated,
  impulsive,
  chirp,
  highpass,
  bandstop,
};

const char* noise_type_name(NoiseType t);
const std::vector<NoiseType>& train_noise_types();
const std::vector<NoiseType>& test_noise_types();

std::vector<double> synth_noise(NoiseType type, std::uint64_t seed, std::size_t length);

/// clean + g noise with g chosen so that 10 log10(P_clean / P_scaled_noise)
/// equals snr_db over the whole utterance. DegenerateInputError if either
/// input has zero power, DimensionError on length mismatch.
std::vector<double> mix_at_snr(std::span<const double> clean, std::span<const double> noise,
                               double snr_db);

/// 10 log10(P_clean / P(noisy - clean)).
double measured_snr(std::span<const double> clean, std::span<const double> noisy);

struct CorpusSpec {
  std::size_t n_train = 200;
  std::size_t n_test = 40;
  std::vector<double> train_snrs{0, 5, 10, 15};
  std::vector<double> test_snrs{2.5, 7.5, 12.5, 17.5};
  std::size_t min_len = 12000;
  std::size_t max_len = 20000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Utterance {
  std::string id;
  std::vector<float> clean;
  std::vector<float> noisy;
  double snr_db = 0;
  std::string noise_type;
};

struct Corpus {
  std::vector<Utterance> train;
  std::vector<Utterance> test;
};

/// Deterministic per seed. Utterance i (counting test after train) uses seed
/// spec.seed ^ i; SNRs cycle through the SNR list, noise types through the
/// split's type list.
Corpus generate_corpus(const CorpusSpec& spec);

/// Writes WAVs under dir/{train,test}/{clean,noisy}/ and the manifests
/// dir/train.tsv, dir/test.tsv. A pair whose noisy peak would clip is scaled
/// down jointly, which preserves its SNR.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct ManifestEntry {
  std::string id;
  std::filesystem::path clean_path;  // resolved against the manifest's directory
  std::filesystem::path noisy_path;
  double snr_db = 0;
};

/// "id<TAB>clean_path<TAB>noisy_path<TAB>snr_db" per line.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Reads every pair listed in a manifest.
std::vector<Utterance> load_manifest(const std::filesystem::path& path);

}  // namespace dccrgan

#endif  // DCCRGAN_DATA_H_

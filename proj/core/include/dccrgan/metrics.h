// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_METRICS_H_
#define DCCRGAN_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dccrgan/stft.h"

namespace dccrgan {

inline constexpr double kSiSdrCap = 100.0;

/// Scale-invariant SDR in dB on mean-removed signals, capped to +-100 dB.
/// DegenerateInputError for an all-zero reference.
template <typename T>
double si_sdr(std::span<const T> est, std::span<const T> ref);

/// Mean per-frame SNR (clamped to [-10, 35] dB) over frames whose reference
/// energy exceeds 1e-8.
template <typename T>
double seg_snr(std::span<const T> est, std::span<const T> ref, std::size_t frame = 400,
               std::size_t hop = 200);

/// RMS over frames of the per-frame RMS difference between
/// 20 log10(|S| + 1e-8) spectra.
template <typename T>
double log_spectral_distance(std::span<const T> est, std::span<const T> ref,
                             const StftConfig& cfg = StftConfig::paper());

struct MetricRow {
  std::string id;
  std::string metric;
  double value = 0;
};

/// "id<TAB>metric<TAB>value" with four decimals.
std::string format_metric_rows(const std::vector<MetricRow>& rows);
void write_metric_report(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace dccrgan

#endif  // DCCRGAN_METRICS_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dccrgan {

namespace {

template <typename T>
void require_equal_length(std::span<const T> a, std::span<const T> b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": estimate has " + std::to_string(a.size()) +
                         " samples, reference " + std::to_string(b.size()));
  }
  if (a.empty()) throw DegenerateInputError(std::string(op) + ": empty input");
}

}  // namespace

template <typename T>
double si_sdr(std::span<const T> est, std::span<const T> ref) {
  require_equal_length(est, ref, "si_sdr");
  const double n = static_cast<double>(ref.size());
  double me = 0, mr = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    me += est[i];
    mr += ref[i];
  }
  me /= n;
  mr /= n;
  double dot = 0, rr = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double r = ref[i] - mr;
    dot += (est[i] - me) * r;
    rr += r * r;
  }
  if (rr == 0) throw DegenerateInputError("si_sdr: reference is zero after mean removal");
  const double alpha = dot / rr;
  double ss = 0, ee = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * (ref[i] - mr);
    const double e = (est[i] - me) - s;
    ss += s * s;
    ee += e * e;
  }
  if (ee == 0) return kSiSdrCap;
  if (ss == 0) return -kSiSdrCap;
  return std::clamp(10.0 * std::log10(ss / ee), -kSiSdrCap, kSiSdrCap);
}

template <typename T>
double seg_snr(std::span<const T> est, std::span<const T> ref, std::size_t frame,
               std::size_t hop) {
  require_equal_length(est, ref, "seg_snr");
  if (frame == 0 || hop == 0) throw ContractError("seg_snr: frame and hop must be positive");
  const std::size_t len = ref.size();
  const std::size_t width = std::min(frame, len);
  const std::size_t frames = (len - width) / hop + 1;
  double total = 0;
  std::size_t active = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    double es = 0, en = 0;
    for (std::size_t i = f * hop; i < f * hop + width; ++i) {
      const double r = ref[i], d = static_cast<double>(est[i]) - r;
      es += r * r;
      en += d * d;
    }
    if (es <= 1e-8) continue;
    const double snr = en == 0 ? 35.0 : 10.0 * std::log10(es / en);
    total += std::clamp(snr, -10.0, 35.0);
    ++active;
  }
  if (active == 0) throw DegenerateInputError("seg_snr: reference has no active frames");
  return total / static_cast<double>(active);
}

template <typename T>
double log_spectral_distance(std::span<const T> est, std::span<const T> ref,
                             const StftConfig& cfg) {
  require_equal_length(est, ref, "log_spectral_distance");
  const auto se = stft(est, cfg);
  const auto sr = stft(ref, cfg);
  const std::size_t bins = se.shape()[0], frames = se.shape()[1];
  double acc = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    double d2 = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      const std::size_t i = k * frames + t;
      const double le = 20.0 * std::log10(std::hypot(double(se.re[i]), double(se.im[i])) + 1e-8);
      const double lr = 20.0 * std::log10(std::hypot(double(sr.re[i]), double(sr.im[i])) + 1e-8);
      d2 += (le - lr) * (le - lr);
    }
    acc += d2 / static_cast<double>(bins);
  }
  return std::sqrt(acc / static_cast<double>(frames));
}

std::string format_metric_rows(const std::vector<MetricRow>& rows) {
  std::string out;
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f", r.value);
    out += r.id + '\t' + r.metric + '\t' + buf + '\n';
  }
  return out;
}

void write_metric_report(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("metrics: cannot open " + path.string() + " for writing");
  f << format_metric_rows(rows);
  if (!f) throw IoError("metrics: write to " + path.string() + " failed");
}

#define DCCRGAN_INSTANTIATE(T)                                                               \
  template double si_sdr(std::span<const T>, std::span<const T>);                            \
  template double seg_snr(std::span<const T>, std::span<const T>, std::size_t, std::size_t); \
  template double log_spectral_distance(std::span<const T>, std::span<const T>,              \
                                        const StftConfig&);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "common/oracles.h"
#include "dccrgan/error.h"
#include "dccrgan/metrics.h"

namespace dccrgan {
namespace {

using Vec = std::vector<double>;

Vec noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void remove_mean(Vec& x) {
  double m = 0;
  for (double v : x) m += v / static_cast<double>(x.size());
  for (auto& v : x) v -= m;
}

TEST(SiSdr, CapsAndScaleInvariance) {
  const Vec r = noise(4000, 1);
  EXPECT_EQ(si_sdr<double>(r, r), kSiSdrCap);
  Vec scaled = r;
  for (auto& v : scaled) v = 3.0 * v + 0.2;  // gain and offset
  EXPECT_EQ(si_sdr<double>(scaled, r), kSiSdrCap);
  Vec neg = r;
  for (auto& v : neg) v = -v;
  EXPECT_EQ(si_sdr<double>(neg, r), kSiSdrCap);
  Vec orth = noise(4000, 9), rc = r;
  remove_mean(orth);
  remove_mean(rc);
  const double p = dot(orth, rc) / dot(rc, rc);
  for (std::size_t i = 0; i < orth.size(); ++i) orth[i] -= p * rc[i];
  EXPECT_EQ(si_sdr<double>(orth, r), -kSiSdrCap);
  EXPECT_THROW(si_sdr<double>(r, Vec(4000, 0.0)), DegenerateInputError);
  EXPECT_THROW(si_sdr<double>(r, Vec(10, 1.0)), DimensionError);
}

TEST(SiSdr, OrthogonalErrorAtTenDecibels) {
  Vec r = noise(4000, 2), e = noise(4000, 3);
  remove_mean(r);
  remove_mean(e);
  const double proj = dot(e, r) / dot(r, r);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= proj * r[i];
  const double scale = std::sqrt(dot(r, r) / (10.0 * dot(e, e)));
  for (double gain : {1.0, 0.25}) {
    Vec est(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) est[i] = gain * (r[i] + scale * e[i]);
    EXPECT_NEAR(si_sdr<double>(est, r), 10.0, 1e-9);
  }
}

TEST(SegSnr, ClampsPerFrame) {
  const Vec r = noise(4000, 4);
  EXPECT_EQ(seg_snr<double>(r, r), 35.0);
  Vec far = r;
  for (auto& v : far) v *= -10.0;
  EXPECT_EQ(seg_snr<double>(far, r), -10.0);
  Vec half = r;
  for (auto& v : half) v *= 0.5;
  EXPECT_NEAR(seg_snr<double>(half, r), 10.0 * std::log10(4.0), 1e-9);
}

TEST(SegSnr, SkipsSilentReferenceFrames) {
  Vec r = noise(4000, 5);
  std::fill(r.begin() + 2000, r.end(), 0.0);
  Vec est = r;
  for (auto& v : est) v *= 0.5;
  // Silent frames would contribute 0/0 or -10 dB if they were not gated.
  EXPECT_NEAR(seg_snr<double>(est, r), 10.0 * std::log10(4.0), 1e-9);
}

TEST(Lsd, ZeroAndGain) {
  const Vec r = noise(4000, 6);
  EXPECT_EQ(log_spectral_distance<double>(r, r), 0.0);
  Vec twice = r;
  for (auto& v : twice) v *= 2.0;
  EXPECT_NEAR(log_spectral_distance<double>(twice, r), 20.0 * std::log10(2.0), 1e-6);
}

TEST(Lsd, MatchesDirectTransform) {
  const StftConfig cfg = StftConfig::paper();
  const Vec r = noise(3000, 7), e = noise(3000, 8);
  const auto w = oracle::sqrt_hann(cfg.win_len);
  const std::size_t frames = (r.size() - cfg.win_len) / cfg.hop + 1;
  double acc = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto se = oracle::dft_frame(e, t * cfg.hop, w, cfg.fft_len);
    const auto sr = oracle::dft_frame(r, t * cfg.hop, w, cfg.fft_len);
    double d2 = 0;
    for (std::size_t k = 1; k <= cfg.fft_len / 2; ++k) {
      const double d = 20 * std::log10(std::abs(se[k]) + 1e-8) - 20 * std::log10(std::abs(sr[k]) + 1e-8);
      d2 += d * d;
    }
    acc += d2 / static_cast<double>(cfg.fft_len / 2);
  }
  EXPECT_NEAR(log_spectral_distance<double>(e, r), std::sqrt(acc / static_cast<double>(frames)), 1e-9);
}

TEST(Report, RowFormat) {
  EXPECT_EQ(format_metric_rows({{"u1", "si_sdr", 12.345678}, {"mean", "lsd", -0.00004}}),
            "u1\tsi_sdr\t12.3457\nmean\tlsd\t-0.0000\n");
}

}  // namespace
}  // namespace dccrgan

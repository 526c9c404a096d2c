// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <complex>

#include "../common/oracles.h"
#include "dccrgan/error.h"
#include "dccrgan/layers.h"

namespace dccrgan {
namespace {

using D = Tensor<double>;
using V = Var<double>;
using CV = CVar<double>;

CV cinput(const D& re, const D& im) { return {V::input(re), V::input(im)}; }

TEST(ComplexConv2d, MatchesComplexLoopOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexConv2d<double> conv(3, 2, rng);
    conv.bias_re.mutable_value() = oracle::random_tensor({2}, rng);
    conv.bias_im.mutable_value() = oracle::random_tensor({2}, rng);
    const D xr = oracle::random_tensor({2, 3, 11, 4}, rng), xi = oracle::random_tensor({2, 3, 11, 4}, rng);
    const auto out = conv.forward(cinput(xr, xi));
    const auto [yr, yi] = oracle::complex_conv2d(conv, xr, xi);
    EXPECT_LT(oracle::max_abs_diff(out.re.value(), yr), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(out.im.value(), yi), 1e-12);
  }
}

TEST(ComplexConv2d, RealKernelActsOnPlanesSeparately) {
  Rng rng(2);
  ComplexConv2d<double> conv(2, 2, rng);
  conv.B.mutable_value().fill(0.0);
  const D xr = oracle::random_tensor({1, 2, 8, 3}, rng), xi = oracle::random_tensor({1, 2, 8, 3}, rng);
  const auto out = conv.forward(cinput(xr, xi));
  EXPECT_EQ(out.re.value(), oracle::conv2d(xr, conv.A.value(), 2, 2, 1));
  EXPECT_EQ(out.im.value(), oracle::conv2d(xi, conv.A.value(), 2, 2, 1));
}

TEST(ComplexConv2d, InitialisationBound) {
  Rng rng(3);
  ComplexConv2d<double> conv(4, 8, rng);
  const double bound = 1.0 / std::sqrt(2.0 * 4 * 5 * 2);
  for (double v : conv.A.value().vec()) EXPECT_LE(std::abs(v), bound);
  for (double v : conv.B.value().vec()) EXPECT_LE(std::abs(v), bound);
}

TEST(ComplexConv2d, ChannelMismatchIsDimensionError) {
  Rng rng(4);
  ComplexConv2d<double> conv(3, 2, rng);
  const D x({1, 2, 8, 3});
  EXPECT_THROW(conv.forward(cinput(x, x)), DimensionError);
}

TEST(ComplexTransposedConv2d, MatchesScatterOracle) {
  Rng rng(5);
  ComplexTransposedConv2d<double> t(3, 2, rng);
  t.bias_re.mutable_value() = oracle::random_tensor({2}, rng);
  const D hr = oracle::random_tensor({2, 3, 4, 3}, rng), hi = oracle::random_tensor({2, 3, 4, 3}, rng);
  const auto out = t.forward(cinput(hr, hi), 8);
  const auto& A = t.A.value();
  const auto& B = t.B.value();
  const D arr = oracle::conv_transpose2d(hr, A, 2, 2, 8), aii = oracle::conv_transpose2d(hi, A, 2, 2, 8);
  const D brr = oracle::conv_transpose2d(hr, B, 2, 2, 8), bii = oracle::conv_transpose2d(hi, B, 2, 2, 8);
  const std::size_t plane = 8 * 3;
  for (std::size_t i = 0; i < arr.numel(); ++i) {
    const std::size_t c = (i / plane) % 2;
    EXPECT_NEAR(out.re.value()[i], arr[i] - bii[i] + t.bias_re.value()[c], 1e-12);
    EXPECT_NEAR(out.im.value()[i], brr[i] + aii[i] + t.bias_im.value()[c], 1e-12);
  }
}

// Per-channel moments over (batch, freq, time) by direct loops.
std::vector<std::pair<double, double>> channel_moments(const D& x) {
  const auto B = x.shape()[0], C = x.shape()[1], inner = x.shape()[2] * x.shape()[3];
  std::vector<std::pair<double, double>> out;
  for (std::size_t c = 0; c < C; ++c) {
    double s = 0, ss = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) s += x[(b * C + c) * inner + i];
    const double mean = s / double(B * inner);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) {
        const double d = x[(b * C + c) * inner + i] - mean;
        ss += d * d;
      }
    out.emplace_back(mean, ss / double(B * inner));
  }
  return out;
}

TEST(ComplexBatchNorm, NaiveNormalisesEachPlane) {
  Rng rng(6);
  ComplexBatchNorm<double> bn(3);
  const D xr = oracle::random_tensor({4, 3, 5, 6}, rng, -3, 5), xi = oracle::random_tensor({4, 3, 5, 6}, rng, 1, 2);
  const auto out = bn.forward(cinput(xr, xi), true);
  for (const D* plane : {&out.re.value(), &out.im.value()}) {
    for (auto [m, v] : channel_moments(*plane)) {
      EXPECT_NEAR(m, 0.0, 1e-12);
      EXPECT_NEAR(v, 1.0, 1e-4);
    }
  }
}

TEST(ComplexBatchNorm, RunningStatsStartFromFirstBatch) {
  Rng rng(7);
  ComplexBatchNorm<double> bn(2);
  const D x({1, 2, 2, 2});
  EXPECT_THROW(bn.forward(cinput(x, x), false), ContractError);
  const D a = oracle::random_tensor({2, 2, 3, 3}, rng), b = oracle::random_tensor({2, 2, 3, 3}, rng);
  bn.forward(cinput(a, a), true);
  EXPECT_TRUE(bn.initialized());
  const auto ma = channel_moments(a);
  EXPECT_NEAR(bn.running[0][1], ma[1].first, 1e-14);
  // Unbiased batch variance enters the running estimate.
  EXPECT_NEAR(bn.running[1][1], ma[1].second * 18.0 / 17.0, 1e-12);
  bn.forward(cinput(b, b), true);
  const auto mb = channel_moments(b);
  EXPECT_NEAR(bn.running[0][0], 0.9 * ma[0].first + 0.1 * mb[0].first, 1e-14);
  EXPECT_NO_THROW(bn.forward(cinput(x, x), false));
}

TEST(ComplexBatchNorm, WhiteningDecorrelatesPlanes) {
  Rng rng(8);
  ComplexBatchNorm<double> bn(2, BatchNormMode::whitening);
  D xr = oracle::random_tensor({4, 2, 6, 5}, rng), xi(xr.shape());
  const D noise = oracle::random_tensor(xr.shape(), rng);
  for (std::size_t i = 0; i < xr.numel(); ++i) xi[i] = 0.8 * xr[i] + 0.3 * noise[i] + 2.0;
  const auto out = bn.forward(cinput(xr, xi), true);
  const auto& yr = out.re.value();
  const auto& yi = out.im.value();
  const std::size_t inner = 30;
  for (std::size_t c = 0; c < 2; ++c) {
    double srr = 0, sii = 0, sri = 0, n = 0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t k = (b * 2 + c) * inner + i;
        srr += yr[k] * yr[k];
        sii += yi[k] * yi[k];
        sri += yr[k] * yi[k];
        ++n;
      }
    // gamma = I / sqrt(2) leaves covariance I / 2.
    EXPECT_NEAR(srr / n, 0.5, 1e-4);
    EXPECT_NEAR(sii / n, 0.5, 1e-4);
    EXPECT_NEAR(sri / n, 0.0, 1e-4);
  }
}

TEST(PRelu, SlopeAppliesToNegativePartsOfBothPlanes) {
  PRelu<double> act(1);
  const D x({1, 1, 1, 2}, std::vector<double>{-2.0, 3.0});
  const auto out = act.forward(cinput(x, x));
  EXPECT_DOUBLE_EQ(out.re.value()[0], -0.5);
  EXPECT_DOUBLE_EQ(out.re.value()[1], 3.0);
  EXPECT_DOUBLE_EQ(out.im.value()[0], -0.5);
}

TEST(Lstm, StackMatchesLoopOracle) {
  Rng rng(9);
  for (bool bidir : {false, true}) {
    Lstm<double> lstm(3, 4, 2, bidir, rng);
    const D x = oracle::random_tensor({2, 6, 3}, rng);
    const D got = lstm.forward(V::input(x)).value();
    EXPECT_EQ(got.shape(), (Shape{2, 6, lstm.output_size()}));
    EXPECT_LT(oracle::max_abs_diff(got, oracle::lstm_stack(lstm, x)), 1e-12);
  }
}

TEST(ComplexLstm, MatchesLoopOracleForBothSigns) {
  Rng rng(10);
  for (auto sign : {ComplexLstmSign::literal, ComplexLstmSign::conventional}) {
    for (bool bidir : {false, true}) {
      ComplexLstm<double> m(4, 3, 2, bidir, rng, sign);
      const D xr = oracle::random_tensor({2, 5, 4}, rng), xi = oracle::random_tensor({2, 5, 4}, rng);
      const auto got = m.forward(cinput(xr, xi));
      const auto [yr, yi] = oracle::complex_lstm(m, xr, xi);
      EXPECT_LT(oracle::max_abs_diff(got.re.value(), yr), 1e-12);
      EXPECT_LT(oracle::max_abs_diff(got.im.value(), yi), 1e-12);
    }
  }
}

TEST(ComplexLinear, MatchesComplexProduct) {
  Rng rng(11);
  ComplexLinear<double> lin(3, 2, rng);
  lin.bias_re.mutable_value() = oracle::random_tensor({2}, rng);
  lin.bias_im.mutable_value() = oracle::random_tensor({2}, rng);
  const D xr = oracle::random_tensor({4, 3}, rng), xi = oracle::random_tensor({4, 3}, rng);
  const auto out = lin.forward(cinput(xr, xi));
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t o = 0; o < 2; ++o) {
      std::complex<double> acc(lin.bias_re.value()[o], lin.bias_im.value()[o]);
      for (std::size_t k = 0; k < 3; ++k) {
        acc += std::complex<double>(lin.w_re.value()[o * 3 + k], lin.w_im.value()[o * 3 + k]) *
               std::complex<double>(xr[n * 3 + k], xi[n * 3 + k]);
      }
      EXPECT_NEAR(out.re.value()[n * 2 + o], acc.real(), 1e-13);
      EXPECT_NEAR(out.im.value()[n * 2 + o], acc.imag(), 1e-13);
    }
}

double top_singular_value(const D& w) {
  const auto rows = static_cast<Eigen::Index>(w.dim(0));
  const auto cols = static_cast<Eigen::Index>(w.numel()) / rows;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = w[r * cols + c];
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

TEST(SpectralNorm, SigmaApproachesSvd) {
  Rng rng(12);
  for (auto [r, c] : {std::pair{8ul, 5ul}, std::pair{16ul, 48ul}, std::pair{40ul, 40ul}}) {
    const D w = oracle::random_tensor({r, c}, rng);
    SpectralNormState<double> s(r, c, rng);
    power_iteration(w, s, 200);
    EXPECT_NEAR(spectral_sigma(w, s) / top_singular_value(w), 1.0, 1e-6);
  }
}

TEST(SpectralNorm, NormalisedWeightHasUnitSpectrum) {
  Rng rng(13);
  V w = V::parameter(oracle::random_tensor({6, 2, 5}, rng));
  SpectralNormState<double> s(6, 10, rng);
  s.n_power_iters = 100;
  const D wn = spectral_normalize(w, s, true).value();
  EXPECT_NEAR(top_singular_value(wn), 1.0, 1e-6);
}

TEST(SpectralNorm, ZeroMatrixKeepsFloor) {
  Rng rng(14);
  const D w({3, 3});
  SpectralNormState<double> s(3, 3, rng);
  power_iteration(w, s, 5);
  EXPECT_EQ(spectral_sigma(w, s), 1e-12);
}

TEST(SnConv1d, EqualsConvolutionWithScaledKernel) {
  Rng rng(15);
  SnConv1d<double> conv(2, 3, 5, 2, 2, rng);
  conv.bias.mutable_value() = oracle::random_tensor({3}, rng);
  const D x = oracle::random_tensor({2, 2, 20}, rng);
  const D y = conv.forward(V::input(x), true).value();
  const double sigma = spectral_sigma(conv.weight.value(), conv.sn);
  D w = conv.weight.value();
  for (auto& v : w.vec()) v /= sigma;
  const D ref = oracle::conv1d(x, w, 2, 2);
  for (std::size_t i = 0; i < ref.numel(); ++i) {
    EXPECT_NEAR(y[i], ref[i] + conv.bias.value()[(i / 10) % 3], 1e-12);
  }
}

}  // namespace
}  // namespace dccrgan

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Straight-loop reference implementations used as test oracles. Nothing here
// shares code with the library beyond the Tensor container.

#ifndef DCCRGAN_TESTS_ORACLES_H_
#define DCCRGAN_TESTS_ORACLES_H_

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "dccrgan/layers.h"
#include "dccrgan/tensor.h"

namespace dccrgan::oracle {

using D = Tensor<double>;

inline D random_tensor(const Shape& s, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  D t(s);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& x : t.vec()) x = u(rng);
  return t;
}

inline double max_abs_diff(const D& a, const D& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// x [B, C, F, T], w [O, C, KF, KT]; frequency stride s with padding lo/hi,
// time kernel tap j looks back KT-1-j frames.
inline D conv2d(const D& x, const D& w, std::size_t s, std::size_t lo, std::size_t hi) {
  const auto B = x.shape()[0], C = x.shape()[1], F = x.shape()[2], T = x.shape()[3];
  const auto O = w.shape()[0], KF = w.shape()[2], KT = w.shape()[3];
  const std::size_t Fo = (F + lo + hi - KF) / s + 1;
  D y({B, O, Fo, T});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t f = 0; f < Fo; ++f)
        for (std::size_t t = 0; t < T; ++t) {
          double acc = 0;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < KF; ++i)
              for (std::size_t j = 0; j < KT; ++j) {
                const long fi = long(f * s + i) - long(lo);
                const long ti = long(t + j) - long(KT - 1);
                if (fi < 0 || fi >= long(F) || ti < 0) continue;
                acc += w[((o * C + c) * KF + i) * KT + j] * x[((b * C + c) * F + fi) * T + ti];
              }
          y[((b * O + o) * Fo + f) * T + t] = acc;
        }
  return y;
}

// Scatter form of the transposed convolution: x [B, C, F', T], w [C, O, KF, KT].
inline D conv_transpose2d(const D& x, const D& w, std::size_t s, std::size_t lo,
                          std::size_t out_f) {
  const auto B = x.shape()[0], C = x.shape()[1], Fi = x.shape()[2], T = x.shape()[3];
  const auto O = w.shape()[1], KF = w.shape()[2], KT = w.shape()[3];
  D y({B, O, out_f, T});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t f = 0; f < Fi; ++f)
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t o = 0; o < O; ++o)
            for (std::size_t i = 0; i < KF; ++i)
              for (std::size_t j = 0; j < KT; ++j) {
                const long fo = long(f * s + i) - long(lo);
                const long to = long(t + j) - long(KT - 1);
                if (fo < 0 || fo >= long(out_f) || to < 0) continue;
                y[((b * O + o) * out_f + fo) * T + to] +=
                    w[((c * O + o) * KF + i) * KT + j] * x[((b * C + c) * Fi + f) * T + t];
              }
  return y;
}

inline D conv1d(const D& x, const D& w, std::size_t stride, std::size_t pad) {
  const auto B = x.shape()[0], C = x.shape()[1], L = x.shape()[2];
  const auto O = w.shape()[0], K = w.shape()[2];
  const std::size_t Lo = (L + 2 * pad - K) / stride + 1;
  D y({B, O, Lo});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t l = 0; l < Lo; ++l) {
        double acc = 0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t k = 0; k < K; ++k) {
            const long i = long(l * stride + k) - long(pad);
            if (i < 0 || i >= long(L)) continue;
            acc += w[(o * C + c) * K + k] * x[(b * C + c) * L + i];
          }
        y[(b * O + o) * Lo + l] = acc;
      }
  return y;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// One LSTM direction, gates (i, f, g, o), zero initial state. x [B, T, in].
inline D lstm(const D& x, const D& wih, const D& whh, const D& bias, bool reverse) {
  const auto B = x.shape()[0], T = x.shape()[1], I = x.shape()[2];
  const std::size_t H = whh.shape()[1];
  D y({B, T, H});
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (std::size_t s = 0; s < T; ++s) {
      const std::size_t t = reverse ? T - 1 - s : s;
      std::vector<double> z(4 * H);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = bias[r];
        for (std::size_t k = 0; k < I; ++k) acc += wih[r * I + k] * x[(b * T + t) * I + k];
        for (std::size_t k = 0; k < H; ++k) acc += whh[r * H + k] * h[k];
        z[r] = acc;
      }
      for (std::size_t k = 0; k < H; ++k) {
        const double ig = sigmoid(z[k]), fg = sigmoid(z[H + k]);
        const double gg = std::tanh(z[2 * H + k]), og = sigmoid(z[3 * H + k]);
        c[k] = fg * c[k] + ig * gg;
        h[k] = og * std::tanh(c[k]);
        y[(b * T + t) * H + k] = h[k];
      }
    }
  }
  return y;
}

// Layer of a (possibly bidirectional) stack: directions concatenated on features.
inline D lstm_layer(const Lstm<double>& stack, std::size_t l, const D& x) {
  const auto& dirs = stack.layers[l].directions;
  std::vector<D> outs;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    outs.push_back(lstm(x, dirs[d].w_ih.value(), dirs[d].w_hh.value(), dirs[d].bias.value(), d == 1));
  }
  const auto B = x.shape()[0], T = x.shape()[1], H = outs[0].shape()[2];
  D y({B, T, H * outs.size()});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t d = 0; d < outs.size(); ++d)
        for (std::size_t k = 0; k < H; ++k)
          y[(b * T + t) * H * outs.size() + d * H + k] = outs[d][(b * T + t) * H + k];
  return y;
}

inline D lstm_stack(const Lstm<double>& stack, D x) {
  for (std::size_t l = 0; l < stack.layers.size(); ++l) x = lstm_layer(stack, l, x);
  return x;
}

// Complex convolution via std::complex arithmetic per tap.
inline std::pair<D, D> complex_conv2d(const ComplexConv2d<double>& layer, const D& xr,
                                      const D& xi) {
  const auto& A = layer.A.value();
  const auto& Bw = layer.B.value();
  const auto Bn = xr.shape()[0], C = xr.shape()[1], F = xr.shape()[2], T = xr.shape()[3];
  const auto O = A.shape()[0], KF = A.shape()[2], KT = A.shape()[3];
  const auto& g = layer.geometry;
  const std::size_t Fo = (F + g.pad_f_lo + g.pad_f_hi - KF) / g.stride_f + 1;
  D yr({Bn, O, Fo, T}), yi({Bn, O, Fo, T});
  for (std::size_t b = 0; b < Bn; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t f = 0; f < Fo; ++f)
        for (std::size_t t = 0; t < T; ++t) {
          std::complex<double> acc(layer.bias_re.value()[o], layer.bias_im.value()[o]);
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < KF; ++i)
              for (std::size_t j = 0; j < KT; ++j) {
                const long fi = long(f * g.stride_f + i) - long(g.pad_f_lo);
                const long ti = long(t + j) - long(KT - 1);
                if (fi < 0 || fi >= long(F) || ti < 0) continue;
                const std::size_t wi = ((o * C + c) * KF + i) * KT + j;
                const std::size_t xi_ = ((b * C + c) * F + fi) * T + ti;
                acc += std::complex<double>(A[wi], Bw[wi]) * std::complex<double>(xr[xi_], xi[xi_]);
              }
          const std::size_t k = ((b * O + o) * Fo + f) * T + t;
          yr[k] = acc.real();
          yi[k] = acc.imag();
        }
  return {yr, yi};
}

// Complex LSTM: per layer Vrr = r(X), Vir = i(X), Vri = r(Y), Vii = i(Y).
inline std::pair<D, D> complex_lstm(const ComplexLstm<double>& m, D xr, D xi) {
  for (std::size_t l = 0; l < m.lstm_r.layers.size(); ++l) {
    const D vrr = lstm_layer(m.lstm_r, l, xr), vir = lstm_layer(m.lstm_i, l, xr);
    const D vri = lstm_layer(m.lstm_r, l, xi), vii = lstm_layer(m.lstm_i, l, xi);
    D re(vrr.shape()), im(vrr.shape());
    const double s = m.sign == ComplexLstmSign::literal ? -1.0 : 1.0;
    for (std::size_t k = 0; k < re.numel(); ++k) {
      re[k] = vrr[k] - vii[k];
      im[k] = vri[k] + s * vir[k];
    }
    xr = re;
    xi = im;
  }
  return {xr, xi};
}

// Direct DFT of one windowed frame, bins 0..N/2.
inline std::vector<std::complex<double>> dft_frame(const std::vector<double>& x, std::size_t start,
                                                   const std::vector<double>& window,
                                                   std::size_t n_fft) {
  std::vector<std::complex<double>> out(n_fft / 2 + 1);
  for (std::size_t k = 0; k <= n_fft / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t n = 0; n < window.size(); ++n) {
      const double ang = -2.0 * std::numbers::pi * double(k) * double(n) / double(n_fft);
      acc += window[n] * x[start + n] * std::polar(1.0, ang);
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> sqrt_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n)));
  }
  return w;
}

}  // namespace dccrgan::oracle

#endif  // DCCRGAN_TESTS_ORACLES_H_

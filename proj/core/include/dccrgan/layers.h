// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_LAYERS_H_
#define DCCRGAN_LAYERS_H_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "dccrgan/complex.h"
#include "dccrgan/ops.h"

namespace dccrgan {

using Rng = std::mt19937_64;

/// Uniform(-bound, bound) tensor.
template <typename T>
Tensor<T> uniform_tensor(const Shape& shape, double bound, Rng& rng);

/// Encoder block convolution: W = A + jB with kernel (freq 5, time 2),
/// stride (2, 1), causal in time. Parameters A, B [out, in, 5, 2].
template <typename T>
class ComplexConv2d {
 public:
  ComplexConv2d(std::size_t in_ch, std::size_t out_ch, Rng& rng);

  /// H [B, in, F, T] -> [B, out, F', T].
  CVar<T> forward(const CVar<T>& h) const;

  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  Var<T> A, B, bias_re, bias_im;
  ops::Conv2dGeometry geometry;
  static constexpr std::size_t kFreq = 5;
  static constexpr std::size_t kTime = 2;
};

/// Adjoint of ComplexConv2d used by the decoder. A, B [in, out, 5, 2].
template <typename T>
class ComplexTransposedConv2d {
 public:
  ComplexTransposedConv2d(std::size_t in_ch, std::size_t out_ch, Rng& rng);

  /// H [B, in, F', T] -> [B, out, out_freq, T].
  CVar<T> forward(const CVar<T>& h, std::size_t out_freq) const;

  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  Var<T> A, B, bias_re, bias_im;
  ops::Conv2dGeometry geometry;
};

enum class BatchNormMode { naive, whitening };

/// Complex batch normalisation over [B, C, F, T] features.
///
/// naive: each plane normalised per channel with its own gamma/beta.
/// whitening: the (re, im) pair is decorrelated with the inverse square root
/// of its 2x2 covariance, then scaled by a symmetric 2x2 gamma.
/// Running moments start from the first training batch and then follow
/// running = 0.9 running + 0.1 batch.
template <typename T>
class ComplexBatchNorm {
 public:
  ComplexBatchNorm(std::size_t channels, BatchNormMode mode = BatchNormMode::naive);

  CVar<T> forward(const CVar<T>& h, bool training);

  std::vector<NamedParam<T>> params(const std::string& prefix) const;
  std::vector<NamedBuffer<T>> buffers(const std::string& prefix);

  BatchNormMode mode() const { return mode_; }
  bool initialized() const { return initialized_.item() != T(0); }

  static constexpr T kEps = T(1e-7);
  static constexpr T kMomentum = T(0.1);

  // naive: gamma_re, gamma_im, beta_re, beta_im.
  // whitening: gamma_rr, gamma_ii, gamma_ri, beta_re, beta_im.
  std::vector<Var<T>> affine;
  // naive: mean_re, var_re, mean_im, var_im.
  // whitening: mean_re, mean_im, cov_rr, cov_ii, cov_ri.
  std::vector<Tensor<T>> running;

 private:
  CVar<T> forward_naive(const CVar<T>& h, bool training);
  CVar<T> forward_whitening(const CVar<T>& h, bool training);
  void update_running(std::size_t i, const Tensor<T>& batch);

  BatchNormMode mode_;
  std::size_t channels_;
  Tensor<T> initialized_;  // scalar flag, stored so checkpoints carry it
};

/// Per-channel PReLU shared by the real and imaginary planes.
template <typename T>
class PRelu {
 public:
  explicit PRelu(std::size_t channels, T init = T(0.25));
  CVar<T> forward(const CVar<T>& h) const;
  Var<T> forward(const Var<T>& x) const;
  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  Var<T> alpha;
};

/// Parameters of one LSTM direction: gates (i, f, g, o).
template <typename T>
struct LstmCell {
  Var<T> w_ih, w_hh, bias;

  LstmCell(std::size_t input, std::size_t hidden, Rng& rng);
  Var<T> run(const Var<T>& x, bool reverse) const;
  void append_params(const std::string& prefix, std::vector<NamedParam<T>>* out) const;
};

/// Stacked real LSTM over [B, T, in] sequences. Each layer emits
/// hidden (or 2 * hidden when bidirectional) features per step.
template <typename T>
class Lstm {
 public:
  Lstm(std::size_t input, std::size_t hidden, std::size_t layers, bool bidirectional, Rng& rng);

  Var<T> forward(const Var<T>& x) const;
  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  std::size_t output_size() const { return hidden_ * (bidirectional_ ? 2 : 1); }

  /// One layer; `directions` holds forward then (optionally) reverse.
  struct Layer {
    std::vector<LstmCell<T>> directions;
  };
  std::vector<Layer> layers;

  /// Runs a single layer (both directions concatenated on the feature axis).
  Var<T> forward_layer(std::size_t l, const Var<T>& x) const;

 private:
  std::size_t hidden_;
  bool bidirectional_;
};

enum class ComplexLstmSign {
  literal,       // V = (Vrr - Vii) + j(Vri - Vir)
  conventional,  // V = (Vrr - Vii) + j(Vri + Vir)
};

/// Complex LSTM built from two real stacks lstm_r, lstm_i. Every layer maps
/// (X, Y) to V with Vrr = lstm_r(X), Vir = lstm_i(X), Vri = lstm_r(Y),
/// Vii = lstm_i(Y), and feeds (Re V, Im V) to the next layer.
template <typename T>
class ComplexLstm {
 public:
  ComplexLstm(std::size_t input, std::size_t hidden, std::size_t layers, bool bidirectional,
              Rng& rng, ComplexLstmSign sign = ComplexLstmSign::literal);

  /// Planes [B, T, in] -> [B, T, output_size()].
  CVar<T> forward(const CVar<T>& h) const;
  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  std::size_t output_size() const { return lstm_r.output_size(); }
  ComplexLstmSign sign;

  Lstm<T> lstm_r;
  Lstm<T> lstm_i;
};

template <typename T>
class Linear {
 public:
  Linear(std::size_t in, std::size_t out, Rng& rng);
  Var<T> forward(const Var<T>& x) const { return ops::linear(x, weight, bias); }
  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  Var<T> weight, bias;
};

/// (X + jY)(Wr + jWi)^T + (br + j bi) over rows of [N, in].
template <typename T>
class ComplexLinear {
 public:
  ComplexLinear(std::size_t in, std::size_t out, Rng& rng);
  CVar<T> forward(const CVar<T>& x) const;
  std::vector<NamedParam<T>> params(const std::string& prefix) const;

  Var<T> w_re, w_im, bias_re, bias_im;
};

/// Power-iteration state for one weight matrix viewed as [rows, cols].
template <typename T>
struct SpectralNormState {
  Tensor<T> u;  // [rows], unit norm
  Tensor<T> v;  // [cols]
  std::size_t n_power_iters = 1;

  SpectralNormState(std::size_t rows, std::size_t cols, Rng& rng);
};

/// One power-iteration step: v <- W^T u / |W^T u|, u <- W v / |W v|.
/// Vectors are left unchanged when the product vanishes.
template <typename T>
void power_iteration(const Tensor<T>& w, SpectralNormState<T>& s, std::size_t iters);

/// u^T W v, floored at 1e-12.
template <typename T>
T spectral_sigma(const Tensor<T>& w, const SpectralNormState<T>& s);

/// W / sigma with W flattened to [shape[0], rest]. When `update` is set the
/// state first advances by s.n_power_iters steps. The gradient treats u and
/// v as constants.
template <typename T>
Var<T> spectral_normalize(const Var<T>& w, SpectralNormState<T>& s, bool update);

/// Spectrally normalised 1-D convolution with bias; weights [out, in, K].
template <typename T>
class SnConv1d {
 public:
  SnConv1d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
           std::size_t pad, Rng& rng);
  Var<T> forward(const Var<T>& x, bool update_sn);
  std::vector<NamedParam<T>> params(const std::string& prefix) const;
  std::vector<NamedBuffer<T>> buffers(const std::string& prefix);

  Var<T> weight, bias;
  SpectralNormState<T> sn;
  std::size_t stride, pad;
};

/// Spectrally normalised fully connected layer; weight [out, in].
template <typename T>
class SnLinear {
 public:
  SnLinear(std::size_t in, std::size_t out, Rng& rng);
  Var<T> forward(const Var<T>& x, bool update_sn);
  std::vector<NamedParam<T>> params(const std::string& prefix) const;
  std::vector<NamedBuffer<T>> buffers(const std::string& prefix);

  Var<T> weight, bias;
  SpectralNormState<T> sn;
};

}  // namespace dccrgan

#endif  // DCCRGAN_LAYERS_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_OPS_H_
#define DCCRGAN_OPS_H_

#include <cstddef>
#include <vector>

#include "dccrgan/autodiff.h"

// Differentiable primitives. Every op builds one graph node with a
// hand-written backward; tensors that follow the [B, C, ...] convention
// treat axis 1 as the channel axis.
namespace dccrgan::ops {

// ---- elementwise -------------------------------------------------------

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> div(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T c);
template <typename T> Var<T> add_scalar(const Var<T>& a, T c);
template <typename T> Var<T> sqrt(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);
/// log(sigmoid(x)) in the overflow-free form -softplus(-x).
template <typename T> Var<T> log_sigmoid(const Var<T>& a);
template <typename T> Var<T> leaky_relu(const Var<T>& a, T slope);
/// x for x >= 0, alpha[c] * x otherwise; alpha has one slope per channel.
template <typename T> Var<T> prelu(const Var<T>& x, const Var<T>& alpha);

/// tanh(r) / r with r = sqrt(re^2 + im^2); smooth at r = 0 where it tends to 1.
template <typename T> Var<T> polar_gain(const Var<T>& re, const Var<T>& im);

// ---- reductions and broadcasts -----------------------------------------

template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);
/// Mean absolute difference, a scalar.
template <typename T> Var<T> l1_mean(const Var<T>& a, const Var<T>& b);
/// x - s where s has shape {1}.
template <typename T> Var<T> sub_scalar(const Var<T>& x, const Var<T>& s);

/// Per-channel mean over every axis except 1; result shape {C}.
template <typename T> Var<T> channel_mean(const Var<T>& x);
template <typename T> Var<T> channel_mul(const Var<T>& x, const Var<T>& s);
template <typename T> Var<T> channel_add(const Var<T>& x, const Var<T>& s);

/// Batch normalisation over every axis except the channel axis.
/// Uses batch moments when `batch_stats` is set (and writes them to
/// *batch_mean / *batch_var, the latter unbiased), otherwise the supplied
/// running moments.
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  const Tensor<T>& running_mean, const Tensor<T>& running_var,
                  bool batch_stats, T eps, Tensor<T>* batch_mean = nullptr,
                  Tensor<T>* batch_var = nullptr);

// ---- shape --------------------------------------------------------------

template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);
template <typename T> Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& perm);
template <typename T> Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis);
template <typename T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t begin, std::size_t end);

// ---- linear maps --------------------------------------------------------

/// x [N, in] -> x W^T + b, W [out, in], optional b [out].
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

/// Frequency/time 2-D geometry: stride along frequency only, explicit
/// frequency padding, causal (past-only) time padding of kernel_t - 1.
struct Conv2dGeometry {
  std::size_t stride_f = 2;
  std::size_t pad_f_lo = 2;
  std::size_t pad_f_hi = 1;

  std::size_t out_freq(std::size_t in_freq, std::size_t kernel_f) const;
};

/// x [B, Cin, F, T], w [Cout, Cin, KF, KT] -> [B, Cout, F', T].
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Conv2dGeometry& g);

/// Exact adjoint of conv2d: x [B, Cin, F', T], w [Cin, Cout, KF, KT] ->
/// [B, Cout, out_freq, T] where conv2d maps out_freq to F'.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Conv2dGeometry& g,
                        std::size_t out_freq);

/// x [B, Cin, L], w [Cout, Cin, K] -> [B, Cout, (L + 2 pad - K) / stride + 1].
template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& w, std::size_t stride, std::size_t pad);

/// One LSTM direction over x [B, T, in]: gates ordered (i, f, g, o),
/// w_ih [4H, in], w_hh [4H, H], bias [4H]; zero initial state.
/// Returns [B, T, H]. `reverse` runs from the last step to the first.
template <typename T>
Var<T> lstm(const Var<T>& x, const Var<T>& w_ih, const Var<T>& w_hh,
            const Var<T>& bias, bool reverse);

}  // namespace dccrgan::ops

#endif  // DCCRGAN_OPS_H_

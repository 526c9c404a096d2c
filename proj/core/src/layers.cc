// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/layers.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace dccrgan {

namespace {

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<const MatRM<T>> matrix_view(const Tensor<T>& w) {
  const auto rows = static_cast<Eigen::Index>(w.dim(0));
  return Eigen::Map<const MatRM<T>>(w.ptr(), rows, static_cast<Eigen::Index>(w.numel()) / rows);
}

template <typename T>
void push(std::vector<NamedParam<T>>* out, const std::string& name, const Var<T>& v) {
  out->push_back({name, v});
}

template <typename T>
CVar<T> add_bias(const CVar<T>& h, const Var<T>& br, const Var<T>& bi) {
  return {ops::channel_add(h.re, br), ops::channel_add(h.im, bi)};
}

}  // namespace

template <typename T>
Tensor<T> uniform_tensor(const Shape& shape, double bound, Rng& rng) {
  Tensor<T> t(shape);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : t.vec()) x = static_cast<T>(dist(rng));
  return t;
}

// ---- complex convolutions -----------------------------------------------

template <typename T>
ComplexConv2d<T>::ComplexConv2d(std::size_t in_ch, std::size_t out_ch, Rng& rng) {
  const double bound = 1.0 / std::sqrt(2.0 * static_cast<double>(in_ch * kFreq * kTime));
  A = Var<T>::parameter(uniform_tensor<T>({out_ch, in_ch, kFreq, kTime}, bound, rng));
  B = Var<T>::parameter(uniform_tensor<T>({out_ch, in_ch, kFreq, kTime}, bound, rng));
  bias_re = Var<T>::parameter(Tensor<T>({out_ch}));
  bias_im = Var<T>::parameter(Tensor<T>({out_ch}));
}

template <typename T>
CVar<T> ComplexConv2d<T>::forward(const CVar<T>& h) const {
  if (h.re.shape().size() != 4 || h.re.shape()[1] != A.shape()[1]) {
    throw DimensionError("complex_conv2d: input " + shape_str(h.re.shape()) +
                         " does not match kernel " + shape_str(A.shape()));
  }
  Var<T> re = ops::sub(ops::conv2d(h.re, A, geometry), ops::conv2d(h.im, B, geometry));
  Var<T> im = ops::add(ops::conv2d(h.re, B, geometry), ops::conv2d(h.im, A, geometry));
  return add_bias<T>({re, im}, bias_re, bias_im);
}

template <typename T>
std::vector<NamedParam<T>> ComplexConv2d<T>::params(const std::string& prefix) const {
  return {{prefix + ".A", A}, {prefix + ".B", B}, {prefix + ".bias_re", bias_re},
          {prefix + ".bias_im", bias_im}};
}

template <typename T>
ComplexTransposedConv2d<T>::ComplexTransposedConv2d(std::size_t in_ch, std::size_t out_ch,
                                                    Rng& rng) {
  const std::size_t kf = ComplexConv2d<T>::kFreq, kt = ComplexConv2d<T>::kTime;
  // Stride 2 halves the taps reaching each output.
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * kf * kt));
  A = Var<T>::parameter(uniform_tensor<T>({in_ch, out_ch, kf, kt}, bound, rng));
  B = Var<T>::parameter(uniform_tensor<T>({in_ch, out_ch, kf, kt}, bound, rng));
  bias_re = Var<T>::parameter(Tensor<T>({out_ch}));
  bias_im = Var<T>::parameter(Tensor<T>({out_ch}));
}

template <typename T>
CVar<T> ComplexTransposedConv2d<T>::forward(const CVar<T>& h, std::size_t out_freq) const {
  if (h.re.shape().size() != 4 || h.re.shape()[1] != A.shape()[0]) {
    throw DimensionError("complex_transposed_conv2d: input " + shape_str(h.re.shape()) +
                         " does not match kernel " + shape_str(A.shape()));
  }
  auto tconv = [&](const Var<T>& x, const Var<T>& w) {
    return ops::conv_transpose2d(x, w, geometry, out_freq);
  };
  Var<T> re = ops::sub(tconv(h.re, A), tconv(h.im, B));
  Var<T> im = ops::add(tconv(h.re, B), tconv(h.im, A));
  return add_bias<T>({re, im}, bias_re, bias_im);
}

template <typename T>
std::vector<NamedParam<T>> ComplexTransposedConv2d<T>::params(const std::string& prefix) const {
  return {{prefix + ".A", A}, {prefix + ".B", B}, {prefix + ".bias_re", bias_re},
          {prefix + ".bias_im", bias_im}};
}

// ---- complex batch norm ---------------------------------------------------

template <typename T>
ComplexBatchNorm<T>::ComplexBatchNorm(std::size_t channels, BatchNormMode mode)
    : mode_(mode), channels_(channels), initialized_(Tensor<T>::scalar(T(0))) {
  const Shape c{channels};
  if (mode == BatchNormMode::naive) {
    affine = {Var<T>::parameter(Tensor<T>(c, T(1))), Var<T>::parameter(Tensor<T>(c, T(1))),
              Var<T>::parameter(Tensor<T>(c)), Var<T>::parameter(Tensor<T>(c))};
    running = {Tensor<T>(c), Tensor<T>(c, T(1)), Tensor<T>(c), Tensor<T>(c, T(1))};
  } else {
    const T g = T(1) / std::sqrt(T(2));
    affine = {Var<T>::parameter(Tensor<T>(c, g)), Var<T>::parameter(Tensor<T>(c, g)),
              Var<T>::parameter(Tensor<T>(c)), Var<T>::parameter(Tensor<T>(c)),
              Var<T>::parameter(Tensor<T>(c))};
    running = {Tensor<T>(c), Tensor<T>(c), Tensor<T>(c, T(1)), Tensor<T>(c, T(1)), Tensor<T>(c)};
  }
}

template <typename T>
void ComplexBatchNorm<T>::update_running(std::size_t i, const Tensor<T>& batch) {
  if (!initialized()) {
    running[i] = batch;
    return;
  }
  for (std::size_t c = 0; c < channels_; ++c) {
    running[i][c] = (T(1) - kMomentum) * running[i][c] + kMomentum * batch[c];
  }
}

template <typename T>
CVar<T> ComplexBatchNorm<T>::forward(const CVar<T>& h, bool training) {
  if (h.re.shape().size() < 2 || h.re.shape()[1] != channels_ || h.im.shape() != h.re.shape()) {
    throw DimensionError("complex_batchnorm: input " + shape_str(h.re.shape()) + " for " +
                         std::to_string(channels_) + " channels");
  }
  if (!training && !initialized()) {
    throw ContractError("complex_batchnorm: evaluation before any training batch "
                        "(running statistics uninitialised)");
  }
  CVar<T> out = mode_ == BatchNormMode::naive ? forward_naive(h, training)
                                              : forward_whitening(h, training);
  if (training) initialized_[0] = T(1);
  return out;
}

template <typename T>
CVar<T> ComplexBatchNorm<T>::forward_naive(const CVar<T>& h, bool training) {
  Tensor<T> mean_re, var_re, mean_im, var_im;
  Var<T> re = ops::batch_norm(h.re, affine[0], affine[2], running[0], running[1], training, kEps,
                              &mean_re, &var_re);
  Var<T> im = ops::batch_norm(h.im, affine[1], affine[3], running[2], running[3], training, kEps,
                              &mean_im, &var_im);
  if (training) {
    update_running(0, mean_re);
    update_running(1, var_re);
    update_running(2, mean_im);
    update_running(3, var_im);
  }
  return {re, im};
}

template <typename T>
CVar<T> ComplexBatchNorm<T>::forward_whitening(const CVar<T>& h, bool training) {
  using namespace ops;
  Var<T> mr, mi, vrr, vii, vri;
  if (training) {
    mr = channel_mean(h.re);
    mi = channel_mean(h.im);
  } else {
    mr = Var<T>::input(running[0]);
    mi = Var<T>::input(running[1]);
  }
  Var<T> cr = channel_add(h.re, scale(mr, T(-1)));
  Var<T> ci = channel_add(h.im, scale(mi, T(-1)));
  if (training) {
    vrr = channel_mean(mul(cr, cr));
    vii = channel_mean(mul(ci, ci));
    vri = channel_mean(mul(cr, ci));
    update_running(0, mr.value());
    update_running(1, mi.value());
    update_running(2, vrr.value());
    update_running(3, vii.value());
    update_running(4, vri.value());
  } else {
    vrr = Var<T>::input(running[2]);
    vii = Var<T>::input(running[3]);
    vri = Var<T>::input(running[4]);
  }
  vrr = add_scalar(vrr, kEps);
  vii = add_scalar(vii, kEps);
  // Closed-form inverse square root of [[vrr, vri], [vri, vii]].
  Var<T> s = sqrt(sub(mul(vrr, vii), mul(vri, vri)));
  Var<T> t = sqrt(add(add(vrr, vii), scale(s, T(2))));
  Var<T> inv = div(Var<T>::input(Tensor<T>(s.shape(), T(1))), mul(s, t));
  Var<T> wrr = mul(add(vii, s), inv);
  Var<T> wii = mul(add(vrr, s), inv);
  Var<T> wri = scale(mul(vri, inv), T(-1));
  Var<T> zr = add(channel_mul(cr, wrr), channel_mul(ci, wri));
  Var<T> zi = add(channel_mul(cr, wri), channel_mul(ci, wii));
  const Var<T>&grr = affine[0], &gii = affine[1], &gri = affine[2];
  Var<T> re = channel_add(add(channel_mul(zr, grr), channel_mul(zi, gri)), affine[3]);
  Var<T> im = channel_add(add(channel_mul(zr, gri), channel_mul(zi, gii)), affine[4]);
  return {re, im};
}

template <typename T>
std::vector<NamedParam<T>> ComplexBatchNorm<T>::params(const std::string& prefix) const {
  static const char* naive[] = {"gamma_re", "gamma_im", "beta_re", "beta_im"};
  static const char* white[] = {"gamma_rr", "gamma_ii", "gamma_ri", "beta_re", "beta_im"};
  std::vector<NamedParam<T>> out;
  for (std::size_t i = 0; i < affine.size(); ++i) {
    push(&out, prefix + "." + (mode_ == BatchNormMode::naive ? naive[i] : white[i]), affine[i]);
  }
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> ComplexBatchNorm<T>::buffers(const std::string& prefix) {
  static const char* naive[] = {"mean_re", "var_re", "mean_im", "var_im"};
  static const char* white[] = {"mean_re", "mean_im", "cov_rr", "cov_ii", "cov_ri"};
  std::vector<NamedBuffer<T>> out;
  for (std::size_t i = 0; i < running.size(); ++i) {
    out.push_back({prefix + "." + (mode_ == BatchNormMode::naive ? naive[i] : white[i]),
                   &running[i]});
  }
  out.push_back({prefix + ".initialized", &initialized_});
  return out;
}

// ---- PReLU ----------------------------------------------------------------

template <typename T>
PRelu<T>::PRelu(std::size_t channels, T init)
    : alpha(Var<T>::parameter(Tensor<T>({channels}, init))) {}

template <typename T>
CVar<T> PRelu<T>::forward(const CVar<T>& h) const {
  return {ops::prelu(h.re, alpha), ops::prelu(h.im, alpha)};
}

template <typename T>
Var<T> PRelu<T>::forward(const Var<T>& x) const {
  return ops::prelu(x, alpha);
}

template <typename T>
std::vector<NamedParam<T>> PRelu<T>::params(const std::string& prefix) const {
  return {{prefix + ".alpha", alpha}};
}

// ---- LSTM -----------------------------------------------------------------

template <typename T>
LstmCell<T>::LstmCell(std::size_t input, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_ih = Var<T>::parameter(uniform_tensor<T>({4 * hidden, input}, bound, rng));
  w_hh = Var<T>::parameter(uniform_tensor<T>({4 * hidden, hidden}, bound, rng));
  bias = Var<T>::parameter(uniform_tensor<T>({4 * hidden}, bound, rng));
}

template <typename T>
Var<T> LstmCell<T>::run(const Var<T>& x, bool reverse) const {
  return ops::lstm(x, w_ih, w_hh, bias, reverse);
}

template <typename T>
void LstmCell<T>::append_params(const std::string& prefix,
                                std::vector<NamedParam<T>>* out) const {
  push(out, prefix + ".w_ih", w_ih);
  push(out, prefix + ".w_hh", w_hh);
  push(out, prefix + ".bias", bias);
}

template <typename T>
Lstm<T>::Lstm(std::size_t input, std::size_t hidden, std::size_t n_layers, bool bidirectional,
              Rng& rng)
    : hidden_(hidden), bidirectional_(bidirectional) {
  std::size_t in = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Layer layer;
    layer.directions.emplace_back(in, hidden, rng);
    if (bidirectional) layer.directions.emplace_back(in, hidden, rng);
    layers.push_back(std::move(layer));
    in = output_size();
  }
}

template <typename T>
Var<T> Lstm<T>::forward_layer(std::size_t l, const Var<T>& x) const {
  const Layer& layer = layers.at(l);
  if (layer.directions.size() == 1) return layer.directions[0].run(x, false);
  return ops::concat<T>({layer.directions[0].run(x, false), layer.directions[1].run(x, true)}, 2);
}

template <typename T>
Var<T> Lstm<T>::forward(const Var<T>& x) const {
  Var<T> h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) h = forward_layer(l, h);
  return h;
}

template <typename T>
std::vector<NamedParam<T>> Lstm<T>::params(const std::string& prefix) const {
  std::vector<NamedParam<T>> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t d = 0; d < layers[l].directions.size(); ++d) {
      layers[l].directions[d].append_params(
          prefix + ".l" + std::to_string(l) + (d == 0 ? ".fwd" : ".bwd"), &out);
    }
  }
  return out;
}

template <typename T>
ComplexLstm<T>::ComplexLstm(std::size_t input, std::size_t hidden, std::size_t layers,
                            bool bidirectional, Rng& rng, ComplexLstmSign sign_)
    : sign(sign_),
      lstm_r(input, hidden, layers, bidirectional, rng),
      lstm_i(input, hidden, layers, bidirectional, rng) {}

template <typename T>
CVar<T> ComplexLstm<T>::forward(const CVar<T>& h) const {
  if (h.re.shape().size() != 3 || h.re.shape()[1] == 0) {
    throw LengthError("complex_lstm: expected non-empty [B, T, features], got " +
                      shape_str(h.re.shape()));
  }
  CVar<T> cur = h;
  for (std::size_t l = 0; l < lstm_r.layers.size(); ++l) {
    Var<T> vrr = lstm_r.forward_layer(l, cur.re);
    Var<T> vir = lstm_i.forward_layer(l, cur.re);
    Var<T> vri = lstm_r.forward_layer(l, cur.im);
    Var<T> vii = lstm_i.forward_layer(l, cur.im);
    Var<T> im = sign == ComplexLstmSign::literal ? ops::sub(vri, vir) : ops::add(vri, vir);
    cur = {ops::sub(vrr, vii), im};
  }
  return cur;
}

template <typename T>
std::vector<NamedParam<T>> ComplexLstm<T>::params(const std::string& prefix) const {
  auto out = lstm_r.params(prefix + ".r");
  auto im = lstm_i.params(prefix + ".i");
  out.insert(out.end(), im.begin(), im.end());
  return out;
}

// ---- linear ---------------------------------------------------------------

template <typename T>
Linear<T>::Linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Var<T>::parameter(uniform_tensor<T>({out, in}, bound, rng));
  bias = Var<T>::parameter(uniform_tensor<T>({out}, bound, rng));
}

template <typename T>
std::vector<NamedParam<T>> Linear<T>::params(const std::string& prefix) const {
  return {{prefix + ".weight", weight}, {prefix + ".bias", bias}};
}

template <typename T>
ComplexLinear<T>::ComplexLinear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(2.0 * static_cast<double>(in));
  w_re = Var<T>::parameter(uniform_tensor<T>({out, in}, bound, rng));
  w_im = Var<T>::parameter(uniform_tensor<T>({out, in}, bound, rng));
  bias_re = Var<T>::parameter(Tensor<T>({out}));
  bias_im = Var<T>::parameter(Tensor<T>({out}));
}

template <typename T>
CVar<T> ComplexLinear<T>::forward(const CVar<T>& x) const {
  Var<T> none;
  Var<T> re = ops::sub(ops::linear(x.re, w_re, bias_re), ops::linear(x.im, w_im, none));
  Var<T> im = ops::add(ops::linear(x.re, w_im, bias_im), ops::linear(x.im, w_re, none));
  return {re, im};
}

template <typename T>
std::vector<NamedParam<T>> ComplexLinear<T>::params(const std::string& prefix) const {
  return {{prefix + ".w_re", w_re}, {prefix + ".w_im", w_im}, {prefix + ".bias_re", bias_re},
          {prefix + ".bias_im", bias_im}};
}

// ---- spectral normalisation ----------------------------------------------

template <typename T>
SpectralNormState<T>::SpectralNormState(std::size_t rows, std::size_t cols, Rng& rng)
    : u({rows}), v({cols}) {
  std::normal_distribution<double> dist(0.0, 1.0);
  double norm = 0;
  for (auto& x : u.vec()) {
    x = static_cast<T>(dist(rng));
    norm += static_cast<double>(x) * static_cast<double>(x);
  }
  norm = std::sqrt(norm);
  for (auto& x : u.vec()) x = static_cast<T>(static_cast<double>(x) / norm);
}

template <typename T>
void power_iteration(const Tensor<T>& w, SpectralNormState<T>& s, std::size_t iters) {
  auto W = matrix_view(w);
  if (s.u.numel() != static_cast<std::size_t>(W.rows()) ||
      s.v.numel() != static_cast<std::size_t>(W.cols())) {
    throw DimensionError("spectral_normalize: state vectors do not match weight " +
                         shape_str(w.shape()));
  }
  Eigen::Map<Vec<T>> u(s.u.ptr(), W.rows());
  Eigen::Map<Vec<T>> v(s.v.ptr(), W.cols());
  const T floor = T(1e-12);
  for (std::size_t it = 0; it < iters; ++it) {
    Vec<T> nv = W.transpose() * u;
    const T nvn = nv.norm();
    if (nvn > floor) v = nv / nvn;
    Vec<T> nu = W * v;
    const T nun = nu.norm();
    if (nun > floor) u = nu / nun;
  }
}

template <typename T>
T spectral_sigma(const Tensor<T>& w, const SpectralNormState<T>& s) {
  auto W = matrix_view(w);
  Eigen::Map<const Vec<T>> u(s.u.ptr(), W.rows());
  Eigen::Map<const Vec<T>> v(s.v.ptr(), W.cols());
  return std::max<T>(u.dot(W * v), T(1e-12));
}

template <typename T>
Var<T> spectral_normalize(const Var<T>& w, SpectralNormState<T>& s, bool update) {
  // v starts empty; one step primes it even outside training.
  const bool primed = std::any_of(s.v.vec().begin(), s.v.vec().end(),
                                  [](T x) { return x != T(0); });
  if (update || !primed) power_iteration(w.value(), s, update ? s.n_power_iters : 1);
  const T sigma = spectral_sigma(w.value(), s);
  Tensor<T> out = w.value();
  for (auto& x : out.vec()) x /= sigma;
  Tensor<T> u = s.u, v = s.v;
  return make_result<T>(std::move(out), {w}, [sigma, u, v](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto W = matrix_view(p.value);
    auto G = matrix_view(n.grad);
    const T inner = (G.array() * W.array()).sum();
    Eigen::Map<const Vec<T>> um(u.ptr(), W.rows());
    Eigen::Map<const Vec<T>> vm(v.ptr(), W.cols());
    auto& gw = p.grad_buffer();
    Eigen::Map<MatRM<T>> GW(gw.ptr(), W.rows(), W.cols());
    GW += G / sigma;
    GW.noalias() -= (inner / (sigma * sigma)) * (um * vm.transpose());
  });
}

template <typename T>
SnConv1d<T>::SnConv1d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
                      std::size_t pad_, Rng& rng)
    : sn(out, in * kernel, rng), stride(stride_), pad(pad_) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * kernel));
  weight = Var<T>::parameter(uniform_tensor<T>({out, in, kernel}, bound, rng));
  bias = Var<T>::parameter(Tensor<T>({out}));
}

template <typename T>
Var<T> SnConv1d<T>::forward(const Var<T>& x, bool update_sn) {
  Var<T> w = spectral_normalize(weight, sn, update_sn);
  return ops::channel_add(ops::conv1d(x, w, stride, pad), bias);
}

template <typename T>
std::vector<NamedParam<T>> SnConv1d<T>::params(const std::string& prefix) const {
  return {{prefix + ".weight", weight}, {prefix + ".bias", bias}};
}

template <typename T>
std::vector<NamedBuffer<T>> SnConv1d<T>::buffers(const std::string& prefix) {
  return {{prefix + ".sn_u", &sn.u}, {prefix + ".sn_v", &sn.v}};
}

template <typename T>
SnLinear<T>::SnLinear(std::size_t in, std::size_t out, Rng& rng) : sn(out, in, rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Var<T>::parameter(uniform_tensor<T>({out, in}, bound, rng));
  bias = Var<T>::parameter(Tensor<T>({out}));
}

template <typename T>
Var<T> SnLinear<T>::forward(const Var<T>& x, bool update_sn) {
  return ops::linear(x, spectral_normalize(weight, sn, update_sn), bias);
}

template <typename T>
std::vector<NamedParam<T>> SnLinear<T>::params(const std::string& prefix) const {
  return {{prefix + ".weight", weight}, {prefix + ".bias", bias}};
}

template <typename T>
std::vector<NamedBuffer<T>> SnLinear<T>::buffers(const std::string& prefix) {
  return {{prefix + ".sn_u", &sn.u}, {prefix + ".sn_v", &sn.v}};
}

#define DCCRGAN_INSTANTIATE(T)                                                    \
  template Tensor<T> uniform_tensor(const Shape&, double, Rng&);                  \
  template class ComplexConv2d<T>;                                                \
  template class ComplexTransposedConv2d<T>;                                      \
  template class ComplexBatchNorm<T>;                                             \
  template class PRelu<T>;                                                        \
  template struct LstmCell<T>;                                                    \
  template class Lstm<T>;                                                         \
  template class ComplexLstm<T>;                                                  \
  template class Linear<T>;                                                       \
  template class ComplexLinear<T>;                                                \
  template struct SpectralNormState<T>;                                           \
  template void power_iteration(const Tensor<T>&, SpectralNormState<T>&, std::size_t); \
  template T spectral_sigma(const Tensor<T>&, const SpectralNormState<T>&);       \
  template Var<T> spectral_normalize(const Var<T>&, SpectralNormState<T>&, bool); \
  template class SnConv1d<T>;                                                     \
  template class SnLinear<T>;

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

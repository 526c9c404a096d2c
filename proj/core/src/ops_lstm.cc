// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>

#include <Eigen/Core>

#include "dccrgan/ops.h"

namespace dccrgan::ops {

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<MatRM<T>>;
template <typename T>
using ConstMap = Eigen::Map<const MatRM<T>>;
// Rows {b * T + t : b} of a [B * T, W] matrix.
template <typename T>
using StridedMap = Eigen::Map<MatRM<T>, 0, Eigen::OuterStride<>>;

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Var<T> lstm(const Var<T>& x, const Var<T>& w_ih, const Var<T>& w_hh, const Var<T>& bias,
            bool reverse) {
  if (x.shape().size() != 3) throw DimensionError("lstm: input must be [B, T, in], got " +
                                                  shape_str(x.shape()));
  const std::size_t batch = x.shape()[0];
  const std::size_t steps = x.shape()[1];
  const std::size_t in = x.shape()[2];
  const std::size_t h4 = w_ih.shape()[0];
  const std::size_t hidden = h4 / 4;
  if (w_ih.shape() != Shape{4 * hidden, in} || w_hh.shape() != Shape{4 * hidden, hidden} ||
      bias.shape() != Shape{4 * hidden}) {
    throw DimensionError("lstm: parameter shapes " + shape_str(w_ih.shape()) + ", " +
                         shape_str(w_hh.shape()) + ", " + shape_str(bias.shape()) +
                         " inconsistent with input " + shape_str(x.shape()));
  }
  const std::size_t rows = batch * steps;

  // Activated gates (i, f, g, o) and cell states, kept for the backward pass.
  auto gates = std::make_shared<AlignedVector<T>>(rows * h4);
  auto cells = std::make_shared<AlignedVector<T>>(rows * hidden);
  Tensor<T> y(Shape{batch, steps, hidden});

  Map<T> z(gates->data(), rows, h4);
  z.noalias() = ConstMap<T>(x.value().ptr(), rows, in) *
                ConstMap<T>(w_ih.value().ptr(), h4, in).transpose();
  z.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.value().ptr(), h4);

  ConstMap<T> whh(w_hh.value().ptr(), h4, hidden);
  MatRM<T> rec(batch, h4);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    const std::size_t tp = reverse ? t + 1 : t - 1;
    StridedMap<T> zt(gates->data() + t * h4, batch, h4, Eigen::OuterStride<>(steps * h4));
    if (s > 0) {
      StridedMap<T> hp(y.ptr() + tp * hidden, batch, hidden,
                       Eigen::OuterStride<>(steps * hidden));
      rec.noalias() = hp * whh.transpose();
      zt += rec;
    }
    for (std::size_t b = 0; b < batch; ++b) {
      T* gr = gates->data() + (b * steps + t) * h4;
      T* c = cells->data() + (b * steps + t) * hidden;
      const T* cp = s > 0 ? cells->data() + (b * steps + tp) * hidden : nullptr;
      T* h = y.ptr() + (b * steps + t) * hidden;
      for (std::size_t k = 0; k < hidden; ++k) {
        const T ig = sigmoid(gr[k]);
        const T fg = sigmoid(gr[hidden + k]);
        const T gg = std::tanh(gr[2 * hidden + k]);
        const T og = sigmoid(gr[3 * hidden + k]);
        gr[k] = ig;
        gr[hidden + k] = fg;
        gr[2 * hidden + k] = gg;
        gr[3 * hidden + k] = og;
        c[k] = fg * (cp ? cp[k] : T(0)) + ig * gg;
        h[k] = og * std::tanh(c[k]);
      }
    }
  }

  return make_result<T>(
      std::move(y), {x, w_ih, w_hh, bias},
      [gates, cells, batch, steps, in, hidden, h4, rows, reverse](Node<T>& n) {
        auto& px = *n.parents[0];
        auto& pih = *n.parents[1];
        auto& phh = *n.parents[2];
        auto& pb = *n.parents[3];
        MatRM<T> dz(rows, h4);
        MatRM<T> dh_next = MatRM<T>::Zero(batch, hidden);
        MatRM<T> dc_next = MatRM<T>::Zero(batch, hidden);
        MatRM<T> dzt(batch, h4);
        MatRM<T> hprev(batch, hidden);
        ConstMap<T> whh(phh.value.ptr(), h4, hidden);
        for (std::size_t s = steps; s-- > 0;) {
          const std::size_t t = reverse ? steps - 1 - s : s;
          const std::size_t tp = reverse ? t + 1 : t - 1;
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t r = b * steps + t;
            const T* gr = gates->data() + r * h4;
            const T* c = cells->data() + r * hidden;
            const T* cp = s > 0 ? cells->data() + (b * steps + tp) * hidden : nullptr;
            const T* gy = n.grad.ptr() + r * hidden;
            for (std::size_t k = 0; k < hidden; ++k) {
              const T ig = gr[k], fg = gr[hidden + k], gg = gr[2 * hidden + k],
                      og = gr[3 * hidden + k];
              const T tc = std::tanh(c[k]);
              const T dh = gy[k] + dh_next(b, k);
              const T dc = dh * og * (T(1) - tc * tc) + dc_next(b, k);
              dc_next(b, k) = dc * fg;
              dzt(b, k) = dc * gg * ig * (T(1) - ig);
              dzt(b, hidden + k) = dc * (cp ? cp[k] : T(0)) * fg * (T(1) - fg);
              dzt(b, 2 * hidden + k) = dc * ig * (T(1) - gg * gg);
              dzt(b, 3 * hidden + k) = dh * tc * og * (T(1) - og);
            }
            dz.row(r) = dzt.row(b);
          }
          dh_next.noalias() = dzt * whh;
          if (s > 0 && phh.requires_grad) {
            for (std::size_t b = 0; b < batch; ++b) {
              hprev.row(b) =
                  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
                      n.value.ptr() + (b * steps + tp) * hidden, hidden);
            }
            Map<T>(phh.grad_buffer().ptr(), h4, hidden).noalias() += dzt.transpose() * hprev;
          }
        }
        ConstMap<T> xm(px.value.ptr(), rows, in);
        if (pih.requires_grad) {
          Map<T>(pih.grad_buffer().ptr(), h4, in).noalias() += dz.transpose() * xm;
        }
        if (px.requires_grad) {
          Map<T>(px.grad_buffer().ptr(), rows, in).noalias() +=
              dz * ConstMap<T>(pih.value.ptr(), h4, in);
        }
        if (pb.requires_grad) {
          Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(pb.grad_buffer().ptr(), h4) +=
              dz.colwise().sum();
        }
      });
}

template Var<float> lstm(const Var<float>&, const Var<float>&, const Var<float>&,
                         const Var<float>&, bool);
template Var<double> lstm(const Var<double>&, const Var<double>&, const Var<double>&,
                          const Var<double>&, bool);

}  // namespace dccrgan::ops

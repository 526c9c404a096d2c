// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

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

// 2-D patch geometry for one batch item.
struct Patch2d {
  std::size_t channels, freq, time;  // source tensor extents
  std::size_t kf, kt;
  std::size_t out_freq;
  Conv2dGeometry g;

  std::size_t rows() const { return channels * kf * kt; }
  std::size_t cols() const { return out_freq * time; }
};

// cols[(c, i, j), (f', t)] = src[c, f' * stride + i - pad_lo, t + j - (kt - 1)].
template <typename T>
void im2col2d(const T* src, const Patch2d& p, T* cols) {
  const std::size_t ncols = p.cols();
  std::fill(cols, cols + p.rows() * ncols, T(0));
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t i = 0; i < p.kf; ++i) {
      for (std::size_t j = 0; j < p.kt; ++j) {
        T* row = cols + ((c * p.kf + i) * p.kt + j) * ncols;
        const std::size_t shift = p.kt - 1 - j;  // time offset into the past
        for (std::size_t fo = 0; fo < p.out_freq; ++fo) {
          const long f = static_cast<long>(fo * p.g.stride_f + i) - static_cast<long>(p.g.pad_f_lo);
          if (f < 0 || f >= static_cast<long>(p.freq)) continue;
          const T* s = src + (c * p.freq + static_cast<std::size_t>(f)) * p.time;
          T* d = row + fo * p.time;
          for (std::size_t t = shift; t < p.time; ++t) d[t] = s[t - shift];
        }
      }
    }
  }
}

template <typename T>
void col2im2d(const T* cols, const Patch2d& p, T* dst) {
  const std::size_t ncols = p.cols();
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t i = 0; i < p.kf; ++i) {
      for (std::size_t j = 0; j < p.kt; ++j) {
        const T* row = cols + ((c * p.kf + i) * p.kt + j) * ncols;
        const std::size_t shift = p.kt - 1 - j;
        for (std::size_t fo = 0; fo < p.out_freq; ++fo) {
          const long f = static_cast<long>(fo * p.g.stride_f + i) - static_cast<long>(p.g.pad_f_lo);
          if (f < 0 || f >= static_cast<long>(p.freq)) continue;
          T* d = dst + (c * p.freq + static_cast<std::size_t>(f)) * p.time;
          const T* s = row + fo * p.time;
          for (std::size_t t = shift; t < p.time; ++t) d[t - shift] += s[t];
        }
      }
    }
  }
}

struct Patch1d {
  std::size_t channels, length;
  std::size_t k, stride, pad;
  std::size_t out_len;

  std::size_t rows() const { return channels * k; }
};

template <typename T>
void im2col1d(const T* src, const Patch1d& p, T* cols) {
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t k = 0; k < p.k; ++k) {
      T* row = cols + (c * p.k + k) * p.out_len;
      const T* s = src + c * p.length;
      for (std::size_t l = 0; l < p.out_len; ++l) {
        const long pos = static_cast<long>(l * p.stride + k) - static_cast<long>(p.pad);
        row[l] = (pos >= 0 && pos < static_cast<long>(p.length)) ? s[pos] : T(0);
      }
    }
  }
}

template <typename T>
void col2im1d(const T* cols, const Patch1d& p, T* dst) {
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t k = 0; k < p.k; ++k) {
      const T* row = cols + (c * p.k + k) * p.out_len;
      T* d = dst + c * p.length;
      for (std::size_t l = 0; l < p.out_len; ++l) {
        const long pos = static_cast<long>(l * p.stride + k) - static_cast<long>(p.pad);
        if (pos >= 0 && pos < static_cast<long>(p.length)) d[pos] += row[l];
      }
    }
  }
}

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_str(s));
  }
}

}  // namespace

std::size_t Conv2dGeometry::out_freq(std::size_t in_freq, std::size_t kernel_f) const {
  const std::size_t padded = in_freq + pad_f_lo + pad_f_hi;
  if (padded < kernel_f || stride_f == 0) {
    throw DimensionError("conv2d: frequency extent " + std::to_string(in_freq) +
                         " too small for kernel " + std::to_string(kernel_f));
  }
  return (padded - kernel_f) / stride_f + 1;
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Conv2dGeometry& g) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(w.shape(), 4, "conv2d weight");
  const std::size_t batch = x.shape()[0];
  const std::size_t cin = x.shape()[1];
  const std::size_t cout = w.shape()[0];
  if (w.shape()[1] != cin) {
    throw DimensionError("conv2d: weight " + shape_str(w.shape()) + " expects " +
                         std::to_string(w.shape()[1]) + " input channels, input is " +
                         shape_str(x.shape()));
  }
  Patch2d p{cin, x.shape()[2], x.shape()[3], w.shape()[2], w.shape()[3], 0, g};
  p.out_freq = g.out_freq(p.freq, p.kf);
  const std::size_t rows = p.rows(), ncols = p.cols();
  const std::size_t in_item = cin * p.freq * p.time;
  const std::size_t out_item = cout * ncols;

  Tensor<T> y(Shape{batch, cout, p.out_freq, p.time});
  AlignedVector<T> cols(rows * ncols);
  ConstMap<T> wm(w.value().ptr(), cout, rows);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col2d(x.value().ptr() + b * in_item, p, cols.data());
    Map<T>(y.ptr() + b * out_item, cout, ncols).noalias() =
        wm * ConstMap<T>(cols.data(), rows, ncols);
  }
  return make_result<T>(std::move(y), {x, w}, [p, batch, cout, in_item, out_item](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    const std::size_t rows = p.rows(), ncols = p.cols();
    AlignedVector<T> cols(rows * ncols);
    ConstMap<T> wm(pw.value.ptr(), cout, rows);
    for (std::size_t b = 0; b < batch; ++b) {
      ConstMap<T> gy(n.grad.ptr() + b * out_item, cout, ncols);
      if (pw.requires_grad) {
        im2col2d(px.value.ptr() + b * in_item, p, cols.data());
        Map<T>(pw.grad_buffer().ptr(), cout, rows).noalias() +=
            gy * ConstMap<T>(cols.data(), rows, ncols).transpose();
      }
      if (px.requires_grad) {
        Map<T>(cols.data(), rows, ncols).noalias() = wm.transpose() * gy;
        col2im2d(cols.data(), p, px.grad_buffer().ptr() + b * in_item);
      }
    }
  });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Conv2dGeometry& g,
                        std::size_t out_freq) {
  require_rank(x.shape(), 4, "conv_transpose2d input");
  require_rank(w.shape(), 4, "conv_transpose2d weight");
  const std::size_t batch = x.shape()[0];
  const std::size_t cin = x.shape()[1];
  if (w.shape()[0] != cin) {
    throw DimensionError("conv_transpose2d: weight " + shape_str(w.shape()) +
                         " does not accept input " + shape_str(x.shape()));
  }
  const std::size_t cout = w.shape()[1];
  // The patch describes the *output* tensor, which plays the role of the
  // forward convolution's input.
  Patch2d p{cout, out_freq, x.shape()[3], w.shape()[2], w.shape()[3], x.shape()[2], g};
  if (g.out_freq(out_freq, p.kf) != x.shape()[2]) {
    throw DimensionError("conv_transpose2d: target frequency size " + std::to_string(out_freq) +
                         " does not map onto input frequency size " +
                         std::to_string(x.shape()[2]));
  }
  const std::size_t rows = p.rows(), ncols = p.cols();
  const std::size_t in_item = cin * ncols;
  const std::size_t out_item = cout * out_freq * p.time;

  Tensor<T> y(Shape{batch, cout, out_freq, p.time});
  AlignedVector<T> cols(rows * ncols);
  ConstMap<T> wm(w.value().ptr(), cin, rows);
  for (std::size_t b = 0; b < batch; ++b) {
    Map<T>(cols.data(), rows, ncols).noalias() =
        wm.transpose() * ConstMap<T>(x.value().ptr() + b * in_item, cin, ncols);
    col2im2d(cols.data(), p, y.ptr() + b * out_item);
  }
  return make_result<T>(std::move(y), {x, w}, [p, batch, cin, in_item, out_item](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    const std::size_t rows = p.rows(), ncols = p.cols();
    AlignedVector<T> cols(rows * ncols);
    ConstMap<T> wm(pw.value.ptr(), cin, rows);
    for (std::size_t b = 0; b < batch; ++b) {
      im2col2d(n.grad.ptr() + b * out_item, p, cols.data());
      ConstMap<T> gc(cols.data(), rows, ncols);
      if (px.requires_grad) {
        Map<T>(px.grad_buffer().ptr() + b * in_item, cin, ncols).noalias() += wm * gc;
      }
      if (pw.requires_grad) {
        Map<T>(pw.grad_buffer().ptr(), cin, rows).noalias() +=
            ConstMap<T>(px.value.ptr() + b * in_item, cin, ncols) * gc.transpose();
      }
    }
  });
}

template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& w, std::size_t stride, std::size_t pad) {
  require_rank(x.shape(), 3, "conv1d input");
  require_rank(w.shape(), 3, "conv1d weight");
  const std::size_t batch = x.shape()[0];
  const std::size_t cin = x.shape()[1];
  const std::size_t cout = w.shape()[0];
  if (w.shape()[1] != cin) {
    throw DimensionError("conv1d: weight " + shape_str(w.shape()) + " does not accept input " +
                         shape_str(x.shape()));
  }
  Patch1d p{cin, x.shape()[2], w.shape()[2], stride, pad, 0};
  if (stride == 0 || p.length + 2 * pad < p.k) {
    throw LengthError("conv1d: input length " + std::to_string(p.length) +
                      " too short for kernel " + std::to_string(p.k));
  }
  p.out_len = (p.length + 2 * pad - p.k) / stride + 1;
  const std::size_t rows = p.rows();
  const std::size_t in_item = cin * p.length;
  const std::size_t out_item = cout * p.out_len;

  Tensor<T> y(Shape{batch, cout, p.out_len});
  AlignedVector<T> cols(rows * p.out_len);
  ConstMap<T> wm(w.value().ptr(), cout, rows);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col1d(x.value().ptr() + b * in_item, p, cols.data());
    Map<T>(y.ptr() + b * out_item, cout, p.out_len).noalias() =
        wm * ConstMap<T>(cols.data(), rows, p.out_len);
  }
  return make_result<T>(std::move(y), {x, w}, [p, batch, cout, in_item, out_item](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    const std::size_t rows = p.rows();
    AlignedVector<T> cols(rows * p.out_len);
    ConstMap<T> wm(pw.value.ptr(), cout, rows);
    for (std::size_t b = 0; b < batch; ++b) {
      ConstMap<T> gy(n.grad.ptr() + b * out_item, cout, p.out_len);
      if (pw.requires_grad) {
        im2col1d(px.value.ptr() + b * in_item, p, cols.data());
        Map<T>(pw.grad_buffer().ptr(), cout, rows).noalias() +=
            gy * ConstMap<T>(cols.data(), rows, p.out_len).transpose();
      }
      if (px.requires_grad) {
        Map<T>(cols.data(), rows, p.out_len).noalias() = wm.transpose() * gy;
        col2im1d(cols.data(), p, px.grad_buffer().ptr() + b * in_item);
      }
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require_rank(x.shape(), 2, "linear input");
  require_rank(weight.shape(), 2, "linear weight");
  const std::size_t rows = x.shape()[0];
  const std::size_t in = x.shape()[1];
  const std::size_t out = weight.shape()[0];
  if (weight.shape()[1] != in) {
    throw DimensionError("linear: weight " + shape_str(weight.shape()) +
                         " does not accept input " + shape_str(x.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{out}) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " for " +
                         std::to_string(out) + " outputs");
  }
  Tensor<T> y(Shape{rows, out});
  Map<T> ym(y.ptr(), rows, out);
  ym.noalias() = ConstMap<T>(x.value().ptr(), rows, in) *
                 ConstMap<T>(weight.value().ptr(), out, in).transpose();
  if (has_bias) {
    ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.value().ptr(), out);
  }
  std::vector<Var<T>> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return make_result<T>(std::move(y), std::move(parents), [rows, in, out](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    ConstMap<T> gy(n.grad.ptr(), rows, out);
    if (px.requires_grad) {
      Map<T>(px.grad_buffer().ptr(), rows, in).noalias() +=
          gy * ConstMap<T>(pw.value.ptr(), out, in);
    }
    if (pw.requires_grad) {
      Map<T>(pw.grad_buffer().ptr(), out, in).noalias() +=
          gy.transpose() * ConstMap<T>(px.value.ptr(), rows, in);
    }
    if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(n.parents[2]->grad_buffer().ptr(), out) +=
          gy.colwise().sum();
    }
  });
}

#define DCCRGAN_INSTANTIATE(T)                                                              \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Conv2dGeometry&);              \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Conv2dGeometry&,     \
                                   std::size_t);                                            \
  template Var<T> conv1d(const Var<T>&, const Var<T>&, std::size_t, std::size_t);           \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan::ops

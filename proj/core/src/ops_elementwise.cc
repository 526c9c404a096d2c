// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <type_traits>

#include "dccrgan/ops.h"

namespace dccrgan::ops {

namespace {

template <typename T>
void require_same(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

// Unary op where the derivative can be written from input x and output y.
template <typename T, typename F, typename D>
Var<T> unary(const Var<T>& a, F f, D df) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  return make_result<T>(std::move(y), {a}, [df](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      g[i] += n.grad[i] * df(p.value[i], n.value[i]);
    }
  });
}

// Size of the channel axis and the inner block that follows it.
template <typename T>
void channel_layout(const Shape& s, std::size_t* outer, std::size_t* channels,
                    std::size_t* inner) {
  if (s.size() < 2) throw DimensionError("channel op needs rank >= 2, got " + shape_str(s));
  *outer = s[0];
  *channels = s[1];
  *inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) *inner *= s[i];
}

template <typename T>
void require_channel_vector(const Var<T>& x, const Var<T>& s, const char* op) {
  if (x.shape().size() < 2 || s.shape() != Shape{x.shape()[1]}) {
    throw DimensionError(std::string(op) + ": per-channel tensor " + shape_str(s.shape()) +
                         " does not match input " + shape_str(x.shape()));
  }
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "add");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] + b.value()[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& n) {
    for (auto& p : n.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "sub");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] - b.value()[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& n) {
    if (n.parents[0]->requires_grad) {
      auto& g = n.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "mul");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] * b.value()[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * pa.value[i];
    }
  });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "div");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] / b.value()[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i] * n.value[i] / pb.value[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T c) {
  return unary(a, [c](T x) { return c * x; }, [c](T, T) { return c; });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T c) {
  return unary(a, [c](T x) { return x + c; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> sqrt(const Var<T>& a) {
  return unary(a, [](T x) { return std::sqrt(x); }, [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary(
      a,
      [](T x) {
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> log_sigmoid(const Var<T>& a) {
  // log sigma(x) = min(x, 0) - log1p(exp(-|x|)); d/dx = sigma(-x).
  return unary(
      a, [](T x) { return std::min(x, T(0)) - std::log1p(std::exp(-std::abs(x))); },
      [](T x, T) {
        if (x >= 0) {
          const T e = std::exp(-x);
          return e / (T(1) + e);
        }
        return T(1) / (T(1) + std::exp(x));
      });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  return unary(a, [slope](T x) { return x >= 0 ? x : slope * x; },
               [slope](T x, T) { return x >= 0 ? T(1) : slope; });
}

template <typename T>
Var<T> prelu(const Var<T>& x, const Var<T>& alpha) {
  require_channel_vector(x, alpha, "prelu");
  std::size_t outer, channels, inner;
  channel_layout<T>(x.shape(), &outer, &channels, &inner);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& av = alpha.value();
  Tensor<T> y(xv.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (o * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const T v = xv[base + i];
        y[base + i] = v >= 0 ? v : av[c] * v;
      }
    }
  }
  return make_result<T>(std::move(y), {x, alpha}, [outer, channels, inner](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pa = *n.parents[1];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t base = (o * channels + c) * inner;
        T ga = 0;
        for (std::size_t i = 0; i < inner; ++i) {
          const T v = px.value[base + i];
          const T g = n.grad[base + i];
          if (px.requires_grad) px.grad_buffer()[base + i] += v >= 0 ? g : pa.value[c] * g;
          if (v < 0) ga += g * v;
        }
        if (pa.requires_grad) pa.grad_buffer()[c] += ga;
      }
    }
  });
}

template <typename T>
Var<T> polar_gain(const Var<T>& re, const Var<T>& im) {
  require_same(re, im, "polar_gain");
  const std::size_t n = re.value().numel();
  Tensor<T> y(re.shape());
  // Store d(gain)/dr divided by r so the chain rule is x * dgdr_over_r.
  std::vector<T> dgdr_over_r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T a = re.value()[i];
    const T b = im.value()[i];
    const T r2 = a * a + b * b;
    const T r = std::sqrt(r2);
    // The closed form cancels badly for small r, earlier in single precision.
    if (r < (std::is_same_v<T, float> ? T(0.05) : T(1e-3))) {
      // tanh(r)/r = 1 - r^2/3 + 2 r^4/15 - 17 r^6/315 + ...
      y[i] = T(1) - r2 / T(3) + T(2) * r2 * r2 / T(15) - T(17) * r2 * r2 * r2 / T(315);
      dgdr_over_r[i] = -T(2) / T(3) + T(8) * r2 / T(15) - T(102) * r2 * r2 / T(315);
    } else {
      const T t = std::tanh(r);
      y[i] = t / r;
      dgdr_over_r[i] = ((T(1) - t * t) * r - t) / (r2 * r);
    }
  }
  return make_result<T>(std::move(y), {re, im},
                        [d = std::move(dgdr_over_r)](Node<T>& node) {
                          for (int k = 0; k < 2; ++k) {
                            auto& p = *node.parents[k];
                            if (!p.requires_grad) continue;
                            auto& g = p.grad_buffer();
                            for (std::size_t i = 0; i < g.numel(); ++i) {
                              g[i] += node.grad[i] * d[i] * p.value[i];
                            }
                          }
                        });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T s = 0;
  for (T v : a.value().data()) s += v;
  return make_result<T>(Tensor<T>::scalar(s), {a}, [](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    const T gs = n.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gs;
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.value().numel()));
}

template <typename T>
Var<T> l1_mean(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "l1_mean");
  const std::size_t n = a.value().numel();
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a.value()[i] - b.value()[i]);
  return make_result<T>(Tensor<T>::scalar(s / static_cast<T>(n)), {a, b}, [n](Node<T>& node) {
    const T gs = node.grad[0] / static_cast<T>(n);
    auto& pa = *node.parents[0];
    auto& pb = *node.parents[1];
    for (std::size_t i = 0; i < n; ++i) {
      const T d = pa.value[i] - pb.value[i];
      const T sgn = d > 0 ? T(1) : (d < 0 ? T(-1) : T(0));
      if (pa.requires_grad) pa.grad_buffer()[i] += gs * sgn;
      if (pb.requires_grad) pb.grad_buffer()[i] -= gs * sgn;
    }
  });
}

template <typename T>
Var<T> sub_scalar(const Var<T>& x, const Var<T>& s) {
  if (s.value().numel() != 1) {
    throw DimensionError("sub_scalar: expected shape [1], got " + shape_str(s.shape()));
  }
  const T c = s.value()[0];
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = x.value()[i] - c;
  return make_result<T>(std::move(y), {x, s}, [](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& ps = *n.parents[1];
    T total = 0;
    for (std::size_t i = 0; i < n.grad.numel(); ++i) total += n.grad[i];
    if (px.requires_grad) {
      auto& g = px.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (ps.requires_grad) ps.grad_buffer()[0] -= total;
  });
}

template <typename T>
Var<T> channel_mean(const Var<T>& x) {
  std::size_t outer, channels, inner;
  channel_layout<T>(x.shape(), &outer, &channels, &inner);
  const T count = static_cast<T>(outer * inner);
  Tensor<T> y(Shape{channels});
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const T* src = x.value().ptr() + (o * channels + c) * inner;
      T s = 0;
      for (std::size_t i = 0; i < inner; ++i) s += src[i];
      y[c] += s;
    }
  }
  for (std::size_t c = 0; c < channels; ++c) y[c] /= count;
  return make_result<T>(std::move(y), {x}, [outer, channels, inner, count](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t c = 0; c < channels; ++c) {
        const T gc = n.grad[c] / count;
        T* dst = g.ptr() + (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += gc;
      }
    }
  });
}

template <typename T>
Var<T> channel_mul(const Var<T>& x, const Var<T>& s) {
  require_channel_vector(x, s, "channel_mul");
  std::size_t outer, channels, inner;
  channel_layout<T>(x.shape(), &outer, &channels, &inner);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (o * channels + c) * inner;
      const T sc = s.value()[c];
      for (std::size_t i = 0; i < inner; ++i) y[base + i] = x.value()[base + i] * sc;
    }
  }
  return make_result<T>(std::move(y), {x, s}, [outer, channels, inner](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& ps = *n.parents[1];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t base = (o * channels + c) * inner;
        T acc = 0;
        for (std::size_t i = 0; i < inner; ++i) {
          const T g = n.grad[base + i];
          if (px.requires_grad) px.grad_buffer()[base + i] += g * ps.value[c];
          acc += g * px.value[base + i];
        }
        if (ps.requires_grad) ps.grad_buffer()[c] += acc;
      }
    }
  });
}

template <typename T>
Var<T> channel_add(const Var<T>& x, const Var<T>& s) {
  require_channel_vector(x, s, "channel_add");
  std::size_t outer, channels, inner;
  channel_layout<T>(x.shape(), &outer, &channels, &inner);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (o * channels + c) * inner;
      const T sc = s.value()[c];
      for (std::size_t i = 0; i < inner; ++i) y[base + i] = x.value()[base + i] + sc;
    }
  }
  return make_result<T>(std::move(y), {x, s}, [outer, channels, inner](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& ps = *n.parents[1];
    if (px.requires_grad) {
      auto& g = px.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (ps.requires_grad) {
      auto& g = ps.grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t c = 0; c < channels; ++c) {
          const T* src = n.grad.ptr() + (o * channels + c) * inner;
          T acc = 0;
          for (std::size_t i = 0; i < inner; ++i) acc += src[i];
          g[c] += acc;
        }
      }
    }
  });
}

template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  const Tensor<T>& running_mean, const Tensor<T>& running_var,
                  bool batch_stats, T eps, Tensor<T>* batch_mean, Tensor<T>* batch_var) {
  require_channel_vector(x, gamma, "batch_norm");
  require_channel_vector(x, beta, "batch_norm");
  std::size_t outer, channels, inner;
  channel_layout<T>(x.shape(), &outer, &channels, &inner);
  const std::size_t count = outer * inner;
  if (batch_stats && count < 2) {
    throw NumericError("batch_norm: batch statistics need more than one value per channel");
  }
  const Tensor<T>& xv = x.value();
  std::vector<T> mu(channels), inv_std(channels);
  if (batch_stats) {
    if (batch_mean) *batch_mean = Tensor<T>(Shape{channels});
    if (batch_var) *batch_var = Tensor<T>(Shape{channels});
    for (std::size_t c = 0; c < channels; ++c) {
      T s = 0;
      for (std::size_t o = 0; o < outer; ++o) {
        const T* src = xv.ptr() + (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) s += src[i];
      }
      mu[c] = s / static_cast<T>(count);
      T ss = 0;
      for (std::size_t o = 0; o < outer; ++o) {
        const T* src = xv.ptr() + (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          const T d = src[i] - mu[c];
          ss += d * d;
        }
      }
      const T var = ss / static_cast<T>(count);
      inv_std[c] = T(1) / std::sqrt(var + eps);
      if (batch_mean) (*batch_mean)[c] = mu[c];
      if (batch_var) (*batch_var)[c] = ss / static_cast<T>(count - 1);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mu[c] = running_mean[c];
      inv_std[c] = T(1) / std::sqrt(running_var[c] + eps);
    }
  }
  Tensor<T> xhat(xv.shape());
  Tensor<T> y(xv.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (o * channels + c) * inner;
      const T gm = gamma.value()[c];
      const T bt = beta.value()[c];
      for (std::size_t i = 0; i < inner; ++i) {
        const T h = (xv[base + i] - mu[c]) * inv_std[c];
        xhat[base + i] = h;
        y[base + i] = gm * h + bt;
      }
    }
  }
  return make_result<T>(
      std::move(y), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), outer, channels, inner, count,
       batch_stats](Node<T>& n) {
        auto& px = *n.parents[0];
        auto& pg = *n.parents[1];
        auto& pb = *n.parents[2];
        for (std::size_t c = 0; c < channels; ++c) {
          T sum_g = 0, sum_gh = 0;
          for (std::size_t o = 0; o < outer; ++o) {
            const std::size_t base = (o * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
              sum_g += n.grad[base + i];
              sum_gh += n.grad[base + i] * xhat[base + i];
            }
          }
          if (pg.requires_grad) pg.grad_buffer()[c] += sum_gh;
          if (pb.requires_grad) pb.grad_buffer()[c] += sum_g;
          if (!px.requires_grad) continue;
          auto& gx = px.grad_buffer();
          const T k = pg.value[c] * inv_std[c];
          const T m = static_cast<T>(count);
          for (std::size_t o = 0; o < outer; ++o) {
            const std::size_t base = (o * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
              const T g = n.grad[base + i];
              gx[base + i] += batch_stats
                                  ? k * (g - sum_g / m - xhat[base + i] * sum_gh / m)
                                  : k * g;
            }
          }
        }
      });
}

#define DCCRGAN_INSTANTIATE(T)                                                          \
  template Var<T> add(const Var<T>&, const Var<T>&);                                    \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                    \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                    \
  template Var<T> div(const Var<T>&, const Var<T>&);                                    \
  template Var<T> scale(const Var<T>&, T);                                              \
  template Var<T> add_scalar(const Var<T>&, T);                                         \
  template Var<T> sqrt(const Var<T>&);                                                  \
  template Var<T> tanh(const Var<T>&);                                                  \
  template Var<T> sigmoid(const Var<T>&);                                               \
  template Var<T> log_sigmoid(const Var<T>&);                                           \
  template Var<T> leaky_relu(const Var<T>&, T);                                         \
  template Var<T> prelu(const Var<T>&, const Var<T>&);                                  \
  template Var<T> polar_gain(const Var<T>&, const Var<T>&);                             \
  template Var<T> sum(const Var<T>&);                                                   \
  template Var<T> mean(const Var<T>&);                                                  \
  template Var<T> l1_mean(const Var<T>&, const Var<T>&);                                \
  template Var<T> sub_scalar(const Var<T>&, const Var<T>&);                             \
  template Var<T> channel_mean(const Var<T>&);                                          \
  template Var<T> channel_mul(const Var<T>&, const Var<T>&);                            \
  template Var<T> channel_add(const Var<T>&, const Var<T>&);                            \
  template Var<T> batch_norm(const Var<T>&, const Var<T>&, const Var<T>&,               \
                             const Tensor<T>&, const Tensor<T>&, bool, T, Tensor<T>*,  \
                             Tensor<T>*);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan::ops

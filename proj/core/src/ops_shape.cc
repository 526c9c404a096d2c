// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/ops.h"

namespace dccrgan::ops {

namespace {

std::vector<std::size_t> strides_of(const Shape& s) {
  std::vector<std::size_t> st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

// Splits a shape around `axis` into (outer, axis, inner) extents.
void split_axis(const Shape& s, std::size_t axis, std::size_t* outer, std::size_t* inner) {
  *outer = 1;
  *inner = 1;
  for (std::size_t i = 0; i < axis; ++i) *outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) *inner *= s[i];
}

}  // namespace

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  if (shape_numel(shape) != a.value().numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                         shape_str(shape));
  }
  return make_result<T>(a.value().reshaped(std::move(shape)), {a}, [](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& perm) {
  const Shape& in = a.shape();
  if (perm.size() != in.size()) {
    throw DimensionError("permute: rank mismatch for " + shape_str(in));
  }
  Shape out(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = in.at(perm[i]);
  const auto in_strides = strides_of(in);
  // Source offset for each destination element, built by walking the
  // destination index in row-major order.
  const std::size_t n = a.value().numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(out.size(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t off = 0;
    for (std::size_t d = 0; d < out.size(); ++d) off += idx[d] * in_strides[perm[d]];
    src[k] = off;
    for (std::size_t d = out.size(); d-- > 0;) {
      if (++idx[d] < out[d]) break;
      idx[d] = 0;
    }
  }
  Tensor<T> y(out);
  for (std::size_t k = 0; k < n; ++k) y[k] = a.value()[src[k]];
  return make_result<T>(std::move(y), {a}, [src = std::move(src)](Node<T>& node) {
    auto& p = *node.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t k = 0; k < src.size(); ++k) g[src[k]] += node.grad[k];
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Shape out = parts[0].shape();
  if (axis >= out.size()) throw DimensionError("concat: axis out of range");
  std::vector<std::size_t> widths;
  out[axis] = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    if (s.size() != out.size()) throw DimensionError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != parts[0].shape()[d]) {
        throw DimensionError("concat: shape " + shape_str(s) + " incompatible with " +
                             shape_str(parts[0].shape()) + " along axis " +
                             std::to_string(axis));
      }
    }
    widths.push_back(s[axis]);
    out[axis] += s[axis];
  }
  std::size_t outer, inner;
  split_axis(out, axis, &outer, &inner);
  Tensor<T> y(out);
  const std::size_t row = out[axis] * inner;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = widths[k] * inner;
    const T* src = parts[k].value().ptr();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy(src + o * w, src + (o + 1) * w, y.ptr() + o * row + offset);
    }
    offset += w;
  }
  return make_result<T>(std::move(y), parts, [widths, outer, inner, row](Node<T>& n) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      const std::size_t w = widths[k] * inner;
      auto& p = *n.parents[k];
      if (p.requires_grad) {
        auto& g = p.grad_buffer();
        for (std::size_t o = 0; o < outer; ++o) {
          const T* src = n.grad.ptr() + o * row + offset;
          T* dst = g.ptr() + o * w;
          for (std::size_t i = 0; i < w; ++i) dst[i] += src[i];
        }
      }
      offset += w;
    }
  });
}

template <typename T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in = a.shape();
  if (axis >= in.size() || begin >= end || end > in[axis]) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for axis " + std::to_string(axis) + " of " + shape_str(in));
  }
  Shape out = in;
  out[axis] = end - begin;
  std::size_t outer, inner;
  split_axis(in, axis, &outer, &inner);
  const std::size_t in_row = in[axis] * inner;
  const std::size_t out_row = out[axis] * inner;
  const std::size_t start = begin * inner;
  Tensor<T> y(out);
  for (std::size_t o = 0; o < outer; ++o) {
    const T* src = a.value().ptr() + o * in_row + start;
    std::copy(src, src + out_row, y.ptr() + o * out_row);
  }
  return make_result<T>(std::move(y), {a}, [outer, in_row, out_row, start](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      T* dst = g.ptr() + o * in_row + start;
      const T* src = n.grad.ptr() + o * out_row;
      for (std::size_t i = 0; i < out_row; ++i) dst[i] += src[i];
    }
  });
}

#define DCCRGAN_INSTANTIATE(T)                                                   \
  template Var<T> reshape(const Var<T>&, Shape);                                 \
  template Var<T> permute(const Var<T>&, const std::vector<std::size_t>&);       \
  template Var<T> concat(const std::vector<Var<T>>&, std::size_t);               \
  template Var<T> slice(const Var<T>&, std::size_t, std::size_t, std::size_t);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan::ops

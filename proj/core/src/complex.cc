// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/complex.h"

#include "dccrgan/ops.h"

namespace dccrgan {

template <typename T>
ComplexTensor<T> complex_elementwise_mul(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  bool ok = sb.size() <= sa.size();
  for (std::size_t i = 0; ok && i < sb.size(); ++i) {
    ok = sb[sb.size() - 1 - i] == sa[sa.size() - 1 - i];
  }
  if (!ok) {
    throw DimensionError("complex_elementwise_mul: shape " + shape_str(sa) + " vs " +
                         shape_str(sb));
  }
  const std::size_t nb = b.numel();
  ComplexTensor<T> out(sa);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const T ar = a.re[i], ai = a.im[i];
    const T br = b.re[i % nb], bi = b.im[i % nb];
    out.re[i] = ar * br - ai * bi;
    out.im[i] = ar * bi + ai * br;
  }
  return out;
}

template <typename T>
CVar<T> complex_mul(const CVar<T>& a, const CVar<T>& b) {
  return {ops::sub(ops::mul(a.re, b.re), ops::mul(a.im, b.im)),
          ops::add(ops::mul(a.re, b.im), ops::mul(a.im, b.re))};
}

template ComplexTensor<float> complex_elementwise_mul(const ComplexTensor<float>&,
                                                      const ComplexTensor<float>&);
template ComplexTensor<double> complex_elementwise_mul(const ComplexTensor<double>&,
                                                       const ComplexTensor<double>&);
template CVar<float> complex_mul(const CVar<float>&, const CVar<float>&);
template CVar<double> complex_mul(const CVar<double>&, const CVar<double>&);

}  // namespace dccrgan

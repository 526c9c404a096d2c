// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_COMPLEX_H_
#define DCCRGAN_COMPLEX_H_

#include "dccrgan/autodiff.h"

namespace dccrgan {

/// (a.re b.re - a.im b.im) + j (a.re b.im + a.im b.re), elementwise.
/// `b` may also match only the trailing dimensions of `a`, in which case it
/// is repeated along a's leading dimensions.
template <typename T>
ComplexTensor<T> complex_elementwise_mul(const ComplexTensor<T>& a, const ComplexTensor<T>& b);

/// Complex value in a reverse-mode graph, one node per real plane.
template <typename T>
struct CVar {
  Var<T> re;
  Var<T> im;

  static CVar input(const ComplexTensor<T>& z) {
    return {Var<T>::input(z.re), Var<T>::input(z.im)};
  }
  const Shape& shape() const { return re.shape(); }
  ComplexTensor<T> value() const { return ComplexTensor<T>(re.value(), im.value()); }
};

/// Differentiable counterpart of complex_elementwise_mul (equal shapes only).
template <typename T>
CVar<T> complex_mul(const CVar<T>& a, const CVar<T>& b);

}  // namespace dccrgan

#endif  // DCCRGAN_COMPLEX_H_

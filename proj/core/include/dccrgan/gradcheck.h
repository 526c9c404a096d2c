// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_GRADCHECK_H_
#define DCCRGAN_GRADCHECK_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dccrgan/tensor.h"

namespace dccrgan {

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
/// coordinate of x. Throws NumericError if f returns a non-finite value.
template <typename T>
Tensor<T> finite_difference_gradient(const std::function<T(const Tensor<T>&)>& f,
                                     const Tensor<T>& x, T h = T(1e-5));

/// Same, restricted to the listed flat coordinates; other entries are zero.
template <typename T>
Tensor<T> finite_difference_gradient(const std::function<T(const Tensor<T>&)>& f,
                                     const Tensor<T>& x, T h,
                                     std::span<const std::size_t> coords);

/// ||a - b||_2 / max(||a||_2, ||b||_2); zero when both vectors vanish.
template <typename T>
T relative_error(std::span<const T> a, std::span<const T> b);

}  // namespace dccrgan

#endif  // DCCRGAN_GRADCHECK_H_

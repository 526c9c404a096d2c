// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/gradcheck.h"

#include <cmath>
#include <numeric>

namespace dccrgan {

template <typename T>
Tensor<T> finite_difference_gradient(const std::function<T(const Tensor<T>&)>& f,
                                     const Tensor<T>& x, T h,
                                     std::span<const std::size_t> coords) {
  if (!(h > 0)) throw ContractError("finite_difference_gradient: step must be positive");
  Tensor<T> grad(x.shape());
  Tensor<T> probe = x;
  for (std::size_t i : coords) {
    const T orig = probe[i];
    probe[i] = orig + h;
    const T up = f(probe);
    probe[i] = orig - h;
    const T down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_difference_gradient: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (T(2) * h);
  }
  return grad;
}

template <typename T>
Tensor<T> finite_difference_gradient(const std::function<T(const Tensor<T>&)>& f,
                                     const Tensor<T>& x, T h) {
  std::vector<std::size_t> all(x.numel());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return finite_difference_gradient<T>(f, x, h, all);
}

template <typename T>
T relative_error(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw DimensionError("relative_error: length mismatch");
  T diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const T denom = std::sqrt(std::max(na, nb));
  if (denom == T(0)) return T(0);
  return std::sqrt(diff) / denom;
}

template Tensor<float> finite_difference_gradient(const std::function<float(const Tensor<float>&)>&,
                                                  const Tensor<float>&, float);
template Tensor<double> finite_difference_gradient(
    const std::function<double(const Tensor<double>&)>&, const Tensor<double>&, double);
template Tensor<float> finite_difference_gradient(const std::function<float(const Tensor<float>&)>&,
                                                  const Tensor<float>&, float,
                                                  std::span<const std::size_t>);
template Tensor<double> finite_difference_gradient(
    const std::function<double(const Tensor<double>&)>&, const Tensor<double>&, double,
    std::span<const std::size_t>);
template float relative_error(std::span<const float>, std::span<const float>);
template double relative_error(std::span<const double>, std::span<const double>);

}  // namespace dccrgan

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_ADAM_H_
#define DCCRGAN_ADAM_H_

#include <cstdint>
#include <vector>

#include "dccrgan/autodiff.h"

namespace dccrgan {

template <typename T>
struct AdamState {
  Tensor<T> m;
  Tensor<T> v;
  std::uint64_t step = 0;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);

  AdamState() = default;
  explicit AdamState(const Shape& shape) : m(shape), v(shape) {}
};

/// One bias-corrected Adam step in place. The gradient is left untouched;
/// a NaN gradient raises NumericError before anything is modified.
template <typename T>
void adam_update(Var<T>& param, AdamState<T>& state, T lr);

/// Adam over a fixed list of named parameters sharing one learning rate.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedParam<T>> params, T lr);

  void step();
  void zero_grad() { zero_grads(params_); }

  T lr() const { return lr_; }
  void set_lr(T lr) { lr_ = lr; }

  const std::vector<NamedParam<T>>& params() const { return params_; }
  std::vector<AdamState<T>>& states() { return states_; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  std::vector<NamedParam<T>> params_;
  std::vector<AdamState<T>> states_;
  T lr_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace dccrgan

#endif  // DCCRGAN_ADAM_H_

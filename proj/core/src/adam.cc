// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/adam.h"

#include <cmath>

namespace dccrgan {

template <typename T>
void adam_update(Var<T>& param, AdamState<T>& state, T lr) {
  const Tensor<T>& g = param.grad();
  if (state.m.shape() != g.shape() || state.v.shape() != g.shape()) {
    throw DimensionError("adam_update: state shape " + shape_str(state.m.shape()) +
                         " vs parameter " + shape_str(g.shape()));
  }
  for (std::size_t i = 0; i < g.numel(); ++i) {
    if (std::isnan(g[i])) throw NumericError("adam_update: NaN gradient, update refused");
  }
  state.step += 1;
  // Bias corrections in double so large step counts stay accurate in f32.
  const double t = static_cast<double>(state.step);
  const T c1 = static_cast<T>(1.0 - std::pow(static_cast<double>(state.beta1), t));
  const T c2 = static_cast<T>(1.0 - std::pow(static_cast<double>(state.beta2), t));
  Tensor<T>& p = param.mutable_value();
  for (std::size_t i = 0; i < g.numel(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (T(1) - state.beta1) * g[i];
    state.v[i] = state.beta2 * state.v[i] + (T(1) - state.beta2) * g[i] * g[i];
    const T mhat = state.m[i] / c1;
    const T vhat = state.v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

template <typename T>
Adam<T>::Adam(std::vector<NamedParam<T>> params, T lr) : params_(std::move(params)), lr_(lr) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.emplace_back(p.var.shape());
}

template <typename T>
void Adam<T>::step() {
  for (const auto& p : params_) {
    for (T g : p.var.grad().data()) {
      if (std::isnan(g)) throw NumericError("adam: NaN gradient in " + p.name + ", update refused");
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_update(params_[i].var, states_[i], lr_);
  }
}

template void adam_update(Var<float>&, AdamState<float>&, float);
template void adam_update(Var<double>&, AdamState<double>&, double);
template class Adam<float>;
template class Adam<double>;

}  // namespace dccrgan

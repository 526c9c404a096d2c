// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_AUTODIFF_H_
#define DCCRGAN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dccrgan/tensor.h"

namespace dccrgan {

enum class Role { parameter, intermediate, input };

/// One value in a reverse-mode graph. Gradients of intermediates are
/// allocated lazily during backward(); parameters own a zeroed gradient
/// from construction.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  Role role = Role::input;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents' gradients.
  std::function<void(Node&)> backward;

  Tensor<T>& grad_buffer() {
    if (grad.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Shared handle to a graph node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var parameter(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->grad = Tensor<T>(value.shape());
    n->value = std::move(value);
    n->role = Role::parameter;
    n->requires_grad = true;
    return Var(std::move(n));
  }

  static Var input(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->role = Role::input;
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  Role role() const { return node_->role; }
  bool requires_grad() const { return node_->requires_grad; }

  /// Toggles gradient tracking; used to freeze parameters.
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  const Tensor<T>& grad() const { return node_->grad_buffer(); }
  Tensor<T>& mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.fill(T(0));
  }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// True unless a NoGradGuard is alive on this thread.
bool grad_enabled();

/// Disables graph construction for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Creates the result node of an operation. When no parent requires a
/// gradient (or grad mode is off) the backward closure is dropped and the
/// result is a plain constant.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->role = Role::intermediate;
  bool any = false;
  if (grad_enabled()) {
    for (const auto& p : parents) any = any || (p.defined() && p.requires_grad());
  }
  if (any) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.shared());
    n->backward = std::move(backward);
  }
  return Var<T>(std::move(n));
}

/// Copies the value into a fresh constant, cutting the graph.
template <typename T>
Var<T> detach(const Var<T>& v) {
  return Var<T>::input(v.value());
}

/// Reverse pass from a scalar loss. Parameter gradients accumulate across
/// calls; intermediate gradients are reset at the start of every call.
template <typename T>
void backward(const Var<T>& loss);

/// Named trainable tensor, as exposed by layers and models.
template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

/// Named non-trainable state (running statistics, power-iteration vectors).
template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

template <typename T>
void zero_grads(const std::vector<NamedParam<T>>& params) {
  for (const auto& p : params) {
    Var<T> v = p.var;
    v.zero_grad();
  }
}

template <typename T>
void set_requires_grad(const std::vector<NamedParam<T>>& params, bool on) {
  for (const auto& p : params) {
    Var<T> v = p.var;
    v.set_requires_grad(on);
  }
}

}  // namespace dccrgan

#endif  // DCCRGAN_AUTODIFF_H_

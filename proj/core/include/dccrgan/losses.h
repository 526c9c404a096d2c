// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_LOSSES_H_
#define DCCRGAN_LOSSES_H_

#include <string>

#include "dccrgan/autodiff.h"

namespace dccrgan {

enum class LossKind { relativistic, relativistic_average };

/// "r" or "ra".
const char* loss_kind_name(LossKind k);
LossKind parse_loss_kind(const std::string& s);

/// mean over the batch of -log sigmoid(d_real - d_fake).
template <typename T>
Var<T> relativistic_d_loss(const Var<T>& d_real, const Var<T>& d_fake);

/// mean over the batch of -log sigmoid(d_fake - d_real).
template <typename T>
Var<T> relativistic_g_adv_loss(const Var<T>& d_real, const Var<T>& d_fake);

template <typename T>
struct AdversarialLosses {
  Var<T> g_loss;
  Var<T> d_loss;
};

/// Relativistic average losses with Dy = sigmoid(d_real - mean d_fake) and
/// Dx = sigmoid(d_fake - mean d_real):
///   g = -mean log Dx - mean log(1 - Dy),  d = -mean log Dy - mean log(1 - Dx).
template <typename T>
AdversarialLosses<T> relativistic_average_losses(const Var<T>& d_real, const Var<T>& d_fake);

/// Both losses of the chosen family.
template <typename T>
AdversarialLosses<T> adversarial_losses(LossKind kind, const Var<T>& d_real, const Var<T>& d_fake);

/// adv + lambda_l1 * mean |g_out - y|.
template <typename T>
Var<T> generator_total_loss(const Var<T>& adv, const Var<T>& g_out, const Var<T>& y, T lambda_l1);

}  // namespace dccrgan

#endif  // DCCRGAN_LOSSES_H_

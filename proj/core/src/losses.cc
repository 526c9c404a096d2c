// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/losses.h"

#include "dccrgan/ops.h"

namespace dccrgan {

namespace {

template <typename T>
void require_scores(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": score batches " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

// -mean log sigmoid(z)
template <typename T>
Var<T> neg_mean_log_sigmoid(const Var<T>& z) {
  return ops::scale(ops::mean(ops::log_sigmoid(z)), T(-1));
}

}  // namespace

const char* loss_kind_name(LossKind k) {
  return k == LossKind::relativistic ? "r" : "ra";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "r") return LossKind::relativistic;
  if (s == "ra") return LossKind::relativistic_average;
  throw ConfigError("unknown loss '" + s + "' (expected r or ra)");
}

template <typename T>
Var<T> relativistic_d_loss(const Var<T>& d_real, const Var<T>& d_fake) {
  require_scores(d_real, d_fake, "relativistic_d_loss");
  return neg_mean_log_sigmoid(ops::sub(d_real, d_fake));
}

template <typename T>
Var<T> relativistic_g_adv_loss(const Var<T>& d_real, const Var<T>& d_fake) {
  require_scores(d_real, d_fake, "relativistic_g_adv_loss");
  return neg_mean_log_sigmoid(ops::sub(d_fake, d_real));
}

template <typename T>
AdversarialLosses<T> relativistic_average_losses(const Var<T>& d_real, const Var<T>& d_fake) {
  require_scores(d_real, d_fake, "relativistic_average_losses");
  Var<T> ry = ops::sub_scalar(d_real, ops::mean(d_fake));  // logit of Dy
  Var<T> rx = ops::sub_scalar(d_fake, ops::mean(d_real));  // logit of Dx
  // log(1 - sigmoid(z)) = log sigmoid(-z)
  Var<T> g = ops::add(neg_mean_log_sigmoid(rx), neg_mean_log_sigmoid(ops::scale(ry, T(-1))));
  Var<T> d = ops::add(neg_mean_log_sigmoid(ry), neg_mean_log_sigmoid(ops::scale(rx, T(-1))));
  return {g, d};
}

template <typename T>
AdversarialLosses<T> adversarial_losses(LossKind kind, const Var<T>& d_real, const Var<T>& d_fake) {
  if (kind == LossKind::relativistic_average) return relativistic_average_losses(d_real, d_fake);
  return {relativistic_g_adv_loss(d_real, d_fake), relativistic_d_loss(d_real, d_fake)};
}

template <typename T>
Var<T> generator_total_loss(const Var<T>& adv, const Var<T>& g_out, const Var<T>& y, T lambda_l1) {
  if (g_out.shape() != y.shape()) {
    throw DimensionError("generator_total_loss: output " + shape_str(g_out.shape()) +
                         " and target " + shape_str(y.shape()) + " differ");
  }
  return ops::add(adv, ops::scale(ops::l1_mean(g_out, y), lambda_l1));
}

#define DCCRGAN_INSTANTIATE(T)                                                                   \
  template Var<T> relativistic_d_loss(const Var<T>&, const Var<T>&);                             \
  template Var<T> relativistic_g_adv_loss(const Var<T>&, const Var<T>&);                         \
  template AdversarialLosses<T> relativistic_average_losses(const Var<T>&, const Var<T>&);       \
  template AdversarialLosses<T> adversarial_losses(LossKind, const Var<T>&, const Var<T>&);      \
  template Var<T> generator_total_loss(const Var<T>&, const Var<T>&, const Var<T>&, T);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

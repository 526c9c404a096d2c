// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/masking.h"

#include <algorithm>
#include <cmath>

#include "dccrgan/ops.h"

namespace dccrgan {

namespace {

template <typename T>
void require_same(const ComplexTensor<T>& x, const Tensor<T>& a, const Tensor<T>& b,
                  const char* op) {
  if (a.shape() != x.shape() || b.shape() != x.shape()) {
    throw DimensionError(std::string(op) + ": mask " + shape_str(a.shape()) + "/" +
                         shape_str(b.shape()) + " against spectrum " + shape_str(x.shape()));
  }
}

template <typename T>
void require_mode(const MaskEstimate<T>& m, MaskMode want, const char* op) {
  if (m.mode != want) {
    throw ContractError(std::string(op) + ": mask is in " + mask_mode_name(m.mode) + " mode");
  }
}

}  // namespace

const char* mask_mode_name(MaskMode m) {
  switch (m) {
    case MaskMode::crm: return "crm";
    case MaskMode::polar: return "polar";
    case MaskMode::real: return "real";
  }
  return "?";
}

MaskMode parse_mask_mode(const std::string& s) {
  if (s == "crm") return MaskMode::crm;
  if (s == "polar") return MaskMode::polar;
  if (s == "real") return MaskMode::real;
  throw ConfigError("unknown mask mode '" + s + "' (expected crm, polar or real)");
}

template <typename T>
MaskEstimate<T> oracle_crm(const ComplexTensor<T>& x, const ComplexTensor<T>& y) {
  if (x.shape() != y.shape()) {
    throw DimensionError("oracle_crm: shapes " + shape_str(x.shape()) + " and " +
                         shape_str(y.shape()) + " differ");
  }
  MaskEstimate<T> m{Tensor<T>(x.shape()), Tensor<T>(x.shape()), MaskMode::crm};
  for (std::size_t i = 0; i < x.re.numel(); ++i) {
    const T xr = x.re[i], xi = x.im[i], yr = y.re[i], yi = y.im[i];
    const T den = std::max<T>(xr * xr + xi * xi, T(kCrmEps));
    m.m_r[i] = (xr * yr + xi * yi) / den;
    m.m_i[i] = (xr * yi - xi * yr) / den;
  }
  return m;
}

template <typename T>
ComplexTensor<T> apply_mask_crm(const ComplexTensor<T>& x, const MaskEstimate<T>& m) {
  require_mode(m, MaskMode::crm, "apply_mask_crm");
  require_same(x, m.m_r, m.m_i, "apply_mask_crm");
  return complex_elementwise_mul(x, ComplexTensor<T>(m.m_r, m.m_i));
}

template <typename T>
ComplexTensor<T> apply_polar(const ComplexTensor<T>& x, const Tensor<T>& mag,
                             const Tensor<T>& phase) {
  require_same(x, mag, phase, "apply_polar");
  ComplexTensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.re.numel(); ++i) {
    const T r = std::hypot(x.re[i], x.im[i]) * mag[i];
    const T theta = std::atan2(x.im[i], x.re[i]) + phase[i];
    out.re[i] = r * std::cos(theta);
    out.im[i] = r * std::sin(theta);
  }
  return out;
}

template <typename T>
ComplexTensor<T> apply_mask_polar(const ComplexTensor<T>& x, const MaskEstimate<T>& m) {
  require_mode(m, MaskMode::polar, "apply_mask_polar");
  require_same(x, m.m_r, m.m_i, "apply_mask_polar");
  Tensor<T> mag(x.shape()), phase(x.shape());
  for (std::size_t i = 0; i < x.re.numel(); ++i) {
    mag[i] = std::tanh(std::hypot(m.m_r[i], m.m_i[i]));
    phase[i] = std::atan2(m.m_i[i], m.m_r[i]);
  }
  return apply_polar(x, mag, phase);
}

template <typename T>
ComplexTensor<T> apply_mask_real(const ComplexTensor<T>& x, const MaskEstimate<T>& m) {
  require_mode(m, MaskMode::real, "apply_mask_real");
  require_same(x, m.m_r, m.m_i, "apply_mask_real");
  ComplexTensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.re.numel(); ++i) {
    out.re[i] = x.re[i] * m.m_r[i];
    out.im[i] = x.im[i] * m.m_i[i];
  }
  return out;
}

template <typename T>
ComplexTensor<T> apply_mask(const ComplexTensor<T>& x, const MaskEstimate<T>& m) {
  switch (m.mode) {
    case MaskMode::crm: return apply_mask_crm(x, m);
    case MaskMode::polar: return apply_mask_polar(x, m);
    case MaskMode::real: return apply_mask_real(x, m);
  }
  throw ContractError("apply_mask: invalid mode");
}

template <typename T>
CVar<T> apply_mask(const CVar<T>& x, const CVar<T>& m, MaskMode mode) {
  if (x.shape() != m.shape()) {
    throw DimensionError("apply_mask: mask " + shape_str(m.shape()) + " against spectrum " +
                         shape_str(x.shape()));
  }
  switch (mode) {
    case MaskMode::crm: return complex_mul(x, m);
    case MaskMode::polar: {
      Var<T> g = ops::polar_gain(m.re, m.im);
      CVar<T> xm = complex_mul(x, m);
      return {ops::mul(xm.re, g), ops::mul(xm.im, g)};
    }
    case MaskMode::real: return {ops::mul(x.re, m.re), ops::mul(x.im, m.im)};
  }
  throw ContractError("apply_mask: invalid mode");
}

#define DCCRGAN_INSTANTIATE(T)                                                                  \
  template MaskEstimate<T> oracle_crm(const ComplexTensor<T>&, const ComplexTensor<T>&);        \
  template ComplexTensor<T> apply_mask_crm(const ComplexTensor<T>&, const MaskEstimate<T>&);    \
  template ComplexTensor<T> apply_polar(const ComplexTensor<T>&, const Tensor<T>&,              \
                                        const Tensor<T>&);                                      \
  template ComplexTensor<T> apply_mask_polar(const ComplexTensor<T>&, const MaskEstimate<T>&);  \
  template ComplexTensor<T> apply_mask_real(const ComplexTensor<T>&, const MaskEstimate<T>&);   \
  template ComplexTensor<T> apply_mask(const ComplexTensor<T>&, const MaskEstimate<T>&);        \
  template CVar<T> apply_mask(const CVar<T>&, const CVar<T>&, MaskMode);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

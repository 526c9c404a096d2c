// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_MASKING_H_
#define DCCRGAN_MASKING_H_

#include <string>

#include "dccrgan/complex.h"

namespace dccrgan {

enum class MaskMode { crm, polar, real };

const char* mask_mode_name(MaskMode m);
/// Accepts "crm", "polar", "real"; ConfigError otherwise.
MaskMode parse_mask_mode(const std::string& s);

/// Decoder output M = M_r + jM_i together with how it is to be applied.
/// In polar mode the planes are the raw (unbounded) decoder outputs.
template <typename T>
struct MaskEstimate {
  Tensor<T> m_r;
  Tensor<T> m_i;
  MaskMode mode = MaskMode::crm;
};

inline constexpr double kCrmEps = 1e-8;

/// Y / X per bin, denominator |X|^2 floored at 1e-8.
template <typename T>
MaskEstimate<T> oracle_crm(const ComplexTensor<T>& x, const ComplexTensor<T>& y);

/// (X_r M_r - X_i M_i) + j(X_r M_i + X_i M_r).
template <typename T>
ComplexTensor<T> apply_mask_crm(const ComplexTensor<T>& x, const MaskEstimate<T>& m);

/// |X| mag e^{j(angle X + phase)} from an explicit magnitude and phase.
template <typename T>
ComplexTensor<T> apply_polar(const ComplexTensor<T>& x, const Tensor<T>& mag,
                             const Tensor<T>& phase);

/// Polar application with mag = tanh(sqrt(M_r^2 + M_i^2)) and
/// phase = atan2(M_i, M_r).
template <typename T>
ComplexTensor<T> apply_mask_polar(const ComplexTensor<T>& x, const MaskEstimate<T>& m);

/// X_r M_r + j(X_i M_i).
template <typename T>
ComplexTensor<T> apply_mask_real(const ComplexTensor<T>& x, const MaskEstimate<T>& m);

/// Dispatches on m.mode.
template <typename T>
ComplexTensor<T> apply_mask(const ComplexTensor<T>& x, const MaskEstimate<T>& m);

/// Differentiable application used inside the generator. The polar branch
/// is written as (tanh|M| / |M|) (X M), which equals the magnitude/phase
/// form above and stays smooth where |M| = 0.
template <typename T>
CVar<T> apply_mask(const CVar<T>& x, const CVar<T>& m, MaskMode mode);

}  // namespace dccrgan

#endif  // DCCRGAN_MASKING_H_

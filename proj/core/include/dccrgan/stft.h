// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_STFT_H_
#define DCCRGAN_STFT_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dccrgan/complex.h"

namespace dccrgan {

/// Framing and transform geometry. Analysis and synthesis share one
/// square-root periodic Hann window, zero-padded to fft_len.
///
/// The spectral axis keeps bins 1..fft_len/2 (DC excluded, Nyquist kept),
/// so a 512-point transform yields 256 bins. The DC value of every frame is
/// still available through stft_dc() and can be handed back to istft().
struct StftConfig {
  std::size_t win_len = 400;
  std::size_t hop = 100;
  std::size_t fft_len = 512;
  std::vector<double> window;

  /// sqrt-Hann config; throws ConfigError if the geometry is invalid.
  static StftConfig make(std::size_t win_len, std::size_t hop, std::size_t fft_len);
  /// 25 ms window, 6.25 ms hop, 512-point transform at 16 kHz.
  static StftConfig paper() { return make(400, 100, 512); }

  std::size_t bins() const { return fft_len / 2; }
  /// floor((len - win_len) / hop) + 1; LengthError if len < win_len.
  std::size_t frames(std::size_t len) const;
  /// Overlap-added squared window, constant on the fully overlapped interior.
  double ola_gain() const;
  /// Checks hop <= win_len <= fft_len and constant overlap-add within 1e-6.
  void validate() const;
};

/// Complex spectrum [bins, frames] of one waveform.
template <typename T>
ComplexTensor<T> stft(std::span<const T> x, const StftConfig& cfg);

/// Per-frame DC values [frames] (the bin stft() leaves out).
template <typename T>
Tensor<T> stft_dc(std::span<const T> x, const StftConfig& cfg);

/// Overlap-add resynthesis with the DC bin set to zero.
template <typename T>
std::vector<T> istft(const ComplexTensor<T>& spec, const StftConfig& cfg, std::size_t out_len);

/// Overlap-add resynthesis with the DC row re-inserted.
template <typename T>
std::vector<T> istft(const ComplexTensor<T>& spec, const Tensor<T>& dc, const StftConfig& cfg,
                     std::size_t out_len);

/// Spectra of a noisy utterance and, when available, its clean reference.
template <typename T>
struct SpectrogramPair {
  ComplexTensor<T> noisy;
  Tensor<T> noisy_dc;
  std::optional<ComplexTensor<T>> clean;
  StftConfig config;
  std::size_t original_len = 0;

  static SpectrogramPair analyze(std::span<const T> noisy, std::optional<std::span<const T>> clean,
                                 const StftConfig& cfg);
};

/// Precomputed Fourier kernels for the batched, differentiable transform.
template <typename T>
class StftKernels {
 public:
  explicit StftKernels(StftConfig cfg);

  const StftConfig& config() const { return cfg_; }

  /// x [B, L] -> spectrum planes [B, 1, bins, frames] and DC [B, frames].
  struct Spectrum {
    CVar<T> bins;
    Var<T> dc;
  };
  Spectrum analyze(const Var<T>& x) const;

  /// Inverse of analyze(): planes [B, 1, bins, frames], dc [B, frames] -> [B, out_len].
  Var<T> synthesize(const CVar<T>& spec, const Var<T>& dc, std::size_t out_len) const;

  struct Matrices;

 private:
  StftConfig cfg_;
  std::shared_ptr<const Matrices> m_;
};

extern template class StftKernels<float>;
extern template class StftKernels<double>;

inline constexpr std::size_t kSliceLen = 16000;
inline constexpr std::size_t kSliceHop = 8000;

/// 16000-sample windows at a hop of 8000; the last one is zero-padded.
template <typename T>
struct SlicedUtterance {
  std::vector<std::vector<T>> slices;
  std::size_t original_len = 0;
  std::size_t pad = 0;
};

/// Number of slices slice_utterance() produces for `len` samples.
std::size_t slice_count(std::size_t len);

template <typename T>
SlicedUtterance<T> slice_utterance(std::span<const T> x);

/// Overlap-add of slices: regions covered twice are halved, trailing pad
/// dropped. GeometryError if the slice list does not fit original_len.
template <typename T>
std::vector<T> reconstruct_utterance(const std::vector<std::vector<T>>& slices,
                                     std::size_t original_len);

}  // namespace dccrgan

#endif  // DCCRGAN_STFT_H_

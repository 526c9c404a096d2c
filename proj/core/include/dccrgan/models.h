// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_MODELS_H_
#define DCCRGAN_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dccrgan/layers.h"
#include "dccrgan/masking.h"
#include "dccrgan/stft.h"

namespace dccrgan {

enum class RecurrentKind { real_lstm, complex_lstm, complex_bilstm };

/// "lstm", "clstm", "cblstm".
const char* recurrent_kind_name(RecurrentKind k);
RecurrentKind parse_recurrent_kind(const std::string& s);

struct GeneratorConfig {
  std::vector<std::size_t> encoder_channels{16, 32, 64, 128, 256, 256};
  RecurrentKind recurrent_kind = RecurrentKind::complex_bilstm;
  std::size_t recurrent_layers = 2;
  /// Units of the real LSTM; complex kinds use half of this per part (and per
  /// direction when bidirectional).
  std::size_t recurrent_units = 256;
  MaskMode mask_mode = MaskMode::crm;
  StftConfig stft = StftConfig::paper();
  BatchNormMode batch_norm = BatchNormMode::naive;
  ComplexLstmSign lstm_sign = ComplexLstmSign::literal;

  static GeneratorConfig paper();
  /// Channels {8, 16, 32}, 128-point transform (64 bins), 32 recurrent units.
  static GeneratorConfig toy();

  std::size_t depth() const { return encoder_channels.size(); }
  /// Frequency size after every encoder layer, starting with the input bins.
  std::vector<std::size_t> freq_sizes() const;
  /// Per-frame features entering the recurrent stack (complex planes count once).
  std::size_t bottleneck_features() const;
  /// ConfigError on inconsistent geometry.
  void validate() const;
};

struct DiscriminatorConfig {
  std::vector<std::size_t> channels{16, 32, 32, 64, 64, 128, 128, 256, 256, 512, 1024};
  std::size_t filter_len = 31;
  std::size_t stride = 2;
  double leaky_slope = 0.3;
  std::size_t input_len = kSliceLen;

  static DiscriminatorConfig paper();
  /// Six layers {8, 16, 16, 32, 32, 64}.
  static DiscriminatorConfig toy();

  /// Sequence length after the convolution stack.
  std::size_t final_length() const;
  void validate() const;
};

/// Complex encoder/decoder generator with a recurrent bottleneck.
template <typename T>
class Generator {
 public:
  Generator(GeneratorConfig cfg, std::uint64_t seed);

  const GeneratorConfig& config() const { return cfg_; }

  /// x [B, L] -> enhanced waveform [B, L].
  Var<T> forward(const Var<T>& x, bool training);

  /// Decoder output M [B, 1, bins, frames] for a spectrum [B, 1, bins, frames].
  CVar<T> estimate_mask(const CVar<T>& spec, bool training);

  /// Applies `mask` to the spectrum and resynthesises [B, out_len]. The DC
  /// row is scaled by the real part of the effective mask at the lowest
  /// kept bin, so an identity mask passes the input through unchanged.
  Var<T> apply_and_synthesize(const typename StftKernels<T>::Spectrum& spec,
                              const CVar<T>& mask, std::size_t out_len) const;

  const StftKernels<T>& stft() const { return stft_; }

  std::vector<NamedParam<T>> params() const;
  std::vector<NamedBuffer<T>> buffers();

  struct EncoderBlock {
    ComplexConv2d<T> conv;
    ComplexBatchNorm<T> bn;
    PRelu<T> act;
  };
  struct DecoderBlock {
    ComplexTransposedConv2d<T> conv;
    std::optional<ComplexBatchNorm<T>> bn;  // absent in the mask head
    std::optional<PRelu<T>> act;
  };
  std::vector<EncoderBlock> encoder;
  std::vector<DecoderBlock> decoder;  // decoder[i] mirrors encoder[i]

 private:
  CVar<T> bottleneck(const CVar<T>& h) const;

  GeneratorConfig cfg_;
  StftKernels<T> stft_;
  std::unique_ptr<Lstm<T>> real_rnn_;
  std::unique_ptr<Linear<T>> real_proj_;
  std::unique_ptr<ComplexLstm<T>> complex_rnn_;
  std::unique_ptr<ComplexLinear<T>> complex_proj_;
};

/// Conditional critic D(candidate, condition) -> unbounded score [B, 1].
template <typename T>
class DiscriminatorBase {
 public:
  virtual ~DiscriminatorBase() = default;
  /// `training` advances the spectral-norm power iteration.
  virtual Var<T> forward(const Var<T>& candidate, const Var<T>& condition, bool training) = 0;
  virtual std::vector<NamedParam<T>> params() const = 0;
  virtual std::vector<NamedBuffer<T>> buffers() { return {}; }
};

template <typename T>
class Discriminator : public DiscriminatorBase<T> {
 public:
  Discriminator(DiscriminatorConfig cfg, std::uint64_t seed);

  const DiscriminatorConfig& config() const { return cfg_; }

  Var<T> forward(const Var<T>& candidate, const Var<T>& condition, bool training) override;
  std::vector<NamedParam<T>> params() const override;
  std::vector<NamedBuffer<T>> buffers() override;

  std::vector<SnConv1d<T>> convs;  // the strided stack followed by the 1x1 layer
  std::unique_ptr<SnLinear<T>> head;

 private:
  DiscriminatorConfig cfg_;
};

std::size_t count_parameters(const GeneratorConfig& cfg);
std::size_t count_parameters(const DiscriminatorConfig& cfg);

template <typename T>
std::size_t count_parameters(const std::vector<NamedParam<T>>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.value().numel();
  return n;
}

extern template class Generator<float>;
extern template class Generator<double>;
extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace dccrgan

#endif  // DCCRGAN_MODELS_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/models.h"

namespace dccrgan {

const char* recurrent_kind_name(RecurrentKind k) {
  switch (k) {
    case RecurrentKind::real_lstm: return "lstm";
    case RecurrentKind::complex_lstm: return "clstm";
    case RecurrentKind::complex_bilstm: return "cblstm";
  }
  return "?";
}

RecurrentKind parse_recurrent_kind(const std::string& s) {
  if (s == "lstm") return RecurrentKind::real_lstm;
  if (s == "clstm") return RecurrentKind::complex_lstm;
  if (s == "cblstm") return RecurrentKind::complex_bilstm;
  throw ConfigError("unknown recurrent kind '" + s + "' (expected lstm, clstm or cblstm)");
}

GeneratorConfig GeneratorConfig::paper() { return GeneratorConfig{}; }

GeneratorConfig GeneratorConfig::toy() {
  GeneratorConfig cfg;
  cfg.encoder_channels = {8, 16, 32};
  cfg.recurrent_units = 32;
  cfg.stft = StftConfig::make(128, 64, 128);
  return cfg;
}

std::vector<std::size_t> GeneratorConfig::freq_sizes() const {
  ops::Conv2dGeometry g;
  std::vector<std::size_t> f{stft.bins()};
  for (std::size_t i = 0; i < depth(); ++i) {
    f.push_back(g.out_freq(f.back(), ComplexConv2d<double>::kFreq));
  }
  return f;
}

std::size_t GeneratorConfig::bottleneck_features() const {
  return encoder_channels.back() * freq_sizes().back();
}

void GeneratorConfig::validate() const {
  stft.validate();
  if (encoder_channels.empty()) throw ConfigError("generator: encoder needs at least one layer");
  for (std::size_t c : encoder_channels) {
    if (c == 0) throw ConfigError("generator: encoder channel counts must be positive");
  }
  const std::size_t bins = stft.bins();
  if (bins % (std::size_t{1} << depth()) != 0) {
    throw ConfigError("generator: " + std::to_string(bins) + " frequency bins are not divisible by 2^" +
                      std::to_string(depth()) + " (one halving per encoder layer)");
  }
  if (recurrent_layers > 0) {
    const bool complex = recurrent_kind != RecurrentKind::real_lstm;
    if (recurrent_units == 0 || (complex && recurrent_units % 2 != 0)) {
      throw ConfigError("generator: recurrent_units must be positive (and even for complex kinds), got " +
                        std::to_string(recurrent_units));
    }
  }
}

template <typename T>
Generator<T>::Generator(GeneratorConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), stft_((cfg_.validate(), cfg_.stft)) {
  Rng rng(seed);
  const auto& ch = cfg_.encoder_channels;
  std::size_t in = 1;
  for (std::size_t c : ch) {
    encoder.push_back({ComplexConv2d<T>(in, c, rng), ComplexBatchNorm<T>(c, cfg_.batch_norm),
                       PRelu<T>(c)});
    in = c;
  }
  const std::size_t feat = cfg_.bottleneck_features();
  if (cfg_.recurrent_layers > 0) {
    const std::size_t units = cfg_.recurrent_units, half = units / 2;
    switch (cfg_.recurrent_kind) {
      case RecurrentKind::real_lstm:
        real_rnn_ = std::make_unique<Lstm<T>>(2 * feat, units, cfg_.recurrent_layers, false, rng);
        real_proj_ = std::make_unique<Linear<T>>(units, 2 * feat, rng);
        break;
      case RecurrentKind::complex_lstm:
      case RecurrentKind::complex_bilstm: {
        const bool bi = cfg_.recurrent_kind == RecurrentKind::complex_bilstm;
        complex_rnn_ = std::make_unique<ComplexLstm<T>>(feat, half, cfg_.recurrent_layers, bi, rng,
                                                        cfg_.lstm_sign);
        complex_proj_ = std::make_unique<ComplexLinear<T>>(complex_rnn_->output_size(), feat, rng);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const std::size_t out = i == 0 ? 1 : ch[i - 1];
    DecoderBlock block{ComplexTransposedConv2d<T>(2 * ch[i], out, rng), std::nullopt, std::nullopt};
    if (i > 0) {
      block.bn.emplace(out, cfg_.batch_norm);
      block.act.emplace(out);
    }
    decoder.push_back(std::move(block));
  }
}

template <typename T>
CVar<T> Generator<T>::bottleneck(const CVar<T>& h) const {
  if (cfg_.recurrent_layers == 0) return h;
  const Shape s = h.re.shape();  // [B, C, F, T]
  const std::size_t batch = s[0], frames = s[3], feat = s[1] * s[2];
  // Per frame, features run channel-major then frequency.
  auto to_seq = [&](const Var<T>& p) {
    return ops::reshape(ops::permute(p, {0, 3, 1, 2}), {batch, frames, feat});
  };
  auto from_seq = [&](const Var<T>& p) {
    return ops::permute(ops::reshape(p, {batch, frames, s[1], s[2]}), {0, 2, 3, 1});
  };
  if (real_rnn_) {
    Var<T> seq = ops::concat<T>({to_seq(h.re), to_seq(h.im)}, 2);
    Var<T> r = real_rnn_->forward(seq);
    Var<T> p = real_proj_->forward(ops::reshape(r, {batch * frames, r.shape()[2]}));
    p = ops::reshape(p, {batch, frames, 2 * feat});
    return {from_seq(ops::slice(p, 2, 0, feat)), from_seq(ops::slice(p, 2, feat, 2 * feat))};
  }
  CVar<T> r = complex_rnn_->forward({to_seq(h.re), to_seq(h.im)});
  const std::size_t out = r.re.shape()[2];
  CVar<T> p = complex_proj_->forward(
      {ops::reshape(r.re, {batch * frames, out}), ops::reshape(r.im, {batch * frames, out})});
  return {from_seq(p.re), from_seq(p.im)};
}

template <typename T>
CVar<T> Generator<T>::estimate_mask(const CVar<T>& spec, bool training) {
  const Shape& s = spec.re.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != cfg_.stft.bins()) {
    throw DimensionError("generator: encoder input must be [B, 1, " +
                         std::to_string(cfg_.stft.bins()) + ", frames], got " + shape_str(s));
  }
  const auto freq = cfg_.freq_sizes();
  std::vector<CVar<T>> skips;
  CVar<T> h = spec;
  for (auto& block : encoder) {
    h = block.act.forward(block.bn.forward(block.conv.forward(h), training));
    skips.push_back(h);
  }
  h = bottleneck(h);
  for (std::size_t i = decoder.size(); i-- > 0;) {
    if (h.re.shape() != skips[i].re.shape()) {
      throw DimensionError("generator: decoder layer " + std::to_string(i) + " input " +
                           shape_str(h.re.shape()) + " does not match skip " +
                           shape_str(skips[i].re.shape()));
    }
    CVar<T> cat{ops::concat<T>({h.re, skips[i].re}, 1), ops::concat<T>({h.im, skips[i].im}, 1)};
    auto& block = decoder[i];
    h = block.conv.forward(cat, freq[i]);
    if (block.bn) h = block.act->forward(block.bn->forward(h, training));
  }
  return h;
}

template <typename T>
Var<T> Generator<T>::apply_and_synthesize(const typename StftKernels<T>::Spectrum& spec,
                                          const CVar<T>& mask, std::size_t out_len) const {
  CVar<T> est = apply_mask(spec.bins, mask, cfg_.mask_mode);
  const std::size_t batch = mask.re.shape()[0], frames = mask.re.shape()[3];
  Var<T> gain = ops::slice(mask.re, 2, 0, 1);
  if (cfg_.mask_mode == MaskMode::polar) {
    gain = ops::mul(gain, ops::polar_gain(gain, ops::slice(mask.im, 2, 0, 1)));
  }
  Var<T> dc = ops::mul(spec.dc, ops::reshape(gain, {batch, frames}));
  return stft_.synthesize(est, dc, out_len);
}

template <typename T>
Var<T> Generator<T>::forward(const Var<T>& x, bool training) {
  if (x.shape().size() != 2) {
    throw DimensionError("generator: input must be [B, L], got " + shape_str(x.shape()));
  }
  auto spec = stft_.analyze(x);
  CVar<T> mask = estimate_mask(spec.bins, training);
  return apply_and_synthesize(spec, mask, x.shape()[1]);
}

template <typename T>
std::vector<NamedParam<T>> Generator<T>::params() const {
  std::vector<NamedParam<T>> out;
  auto append = [&out](std::vector<NamedParam<T>> p) { out.insert(out.end(), p.begin(), p.end()); };
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    const std::string pre = "enc" + std::to_string(i);
    append(encoder[i].conv.params(pre + ".conv"));
    append(encoder[i].bn.params(pre + ".bn"));
    append(encoder[i].act.params(pre + ".act"));
  }
  if (real_rnn_) {
    append(real_rnn_->params("rnn"));
    append(real_proj_->params("proj"));
  }
  if (complex_rnn_) {
    append(complex_rnn_->params("rnn"));
    append(complex_proj_->params("proj"));
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    const std::string pre = "dec" + std::to_string(i);
    append(decoder[i].conv.params(pre + ".conv"));
    if (decoder[i].bn) append(decoder[i].bn->params(pre + ".bn"));
    if (decoder[i].act) append(decoder[i].act->params(pre + ".act"));
  }
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> Generator<T>::buffers() {
  std::vector<NamedBuffer<T>> out;
  auto append = [&out](std::vector<NamedBuffer<T>> b) { out.insert(out.end(), b.begin(), b.end()); };
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    append(encoder[i].bn.buffers("enc" + std::to_string(i) + ".bn"));
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    if (decoder[i].bn) append(decoder[i].bn->buffers("dec" + std::to_string(i) + ".bn"));
  }
  return out;
}

std::size_t count_parameters(const GeneratorConfig& cfg) {
  return count_parameters(Generator<float>(cfg, 0).params());
}

template class Generator<float>;
template class Generator<double>;

}  // namespace dccrgan

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/models.h"

namespace dccrgan {

DiscriminatorConfig DiscriminatorConfig::paper() { return DiscriminatorConfig{}; }

DiscriminatorConfig DiscriminatorConfig::toy() {
  DiscriminatorConfig cfg;
  cfg.channels = {8, 16, 16, 32, 32, 64};
  return cfg;
}

std::size_t DiscriminatorConfig::final_length() const {
  std::size_t len = input_len;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    len = (len + 2 * (filter_len / 2) - filter_len) / stride + 1;
  }
  return len;
}

void DiscriminatorConfig::validate() const {
  if (channels.empty()) throw ConfigError("discriminator: needs at least one convolution layer");
  if (filter_len % 2 == 0 || stride == 0 || input_len == 0) {
    throw ConfigError("discriminator: filter length must be odd and stride, input length positive");
  }
  for (std::size_t c : channels) {
    if (c == 0) throw ConfigError("discriminator: channel counts must be positive");
  }
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  std::size_t in = 2;
  for (std::size_t c : cfg_.channels) {
    convs.emplace_back(in, c, cfg_.filter_len, cfg_.stride, cfg_.filter_len / 2, rng);
    in = c;
  }
  convs.emplace_back(in, 1, 1, 1, 0, rng);
  head = std::make_unique<SnLinear<T>>(cfg_.final_length(), 1, rng);
}

template <typename T>
Var<T> Discriminator<T>::forward(const Var<T>& candidate, const Var<T>& condition,
                                 bool training) {
  const Shape& s = candidate.shape();
  if (s.size() != 2 || condition.shape() != s) {
    throw DimensionError("discriminator: candidate " + shape_str(s) + " and condition " +
                         shape_str(condition.shape()) + " must both be [B, L]");
  }
  if (s[1] != cfg_.input_len) {
    throw DimensionError("discriminator: expects " + std::to_string(cfg_.input_len) +
                         "-sample inputs, got " + std::to_string(s[1]));
  }
  const std::size_t batch = s[0];
  Var<T> h = ops::concat<T>(
      {ops::reshape(candidate, {batch, 1, s[1]}), ops::reshape(condition, {batch, 1, s[1]})}, 1);
  const T slope = static_cast<T>(cfg_.leaky_slope);
  for (std::size_t i = 0; i + 1 < convs.size(); ++i) {
    h = ops::leaky_relu(convs[i].forward(h, training), slope);
  }
  h = convs.back().forward(h, training);
  return head->forward(ops::reshape(h, {batch, h.shape()[2]}), training);
}

template <typename T>
std::vector<NamedParam<T>> Discriminator<T>::params() const {
  std::vector<NamedParam<T>> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    auto p = convs[i].params("conv" + std::to_string(i));
    out.insert(out.end(), p.begin(), p.end());
  }
  auto p = head->params("head");
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> Discriminator<T>::buffers() {
  std::vector<NamedBuffer<T>> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    auto b = convs[i].buffers("conv" + std::to_string(i));
    out.insert(out.end(), b.begin(), b.end());
  }
  auto b = head->buffers("head");
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::size_t count_parameters(const DiscriminatorConfig& cfg) {
  return count_parameters(Discriminator<float>(cfg, 0).params());
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace dccrgan

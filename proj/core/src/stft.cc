// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/stft.h"

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "dccrgan/ops.h"

namespace dccrgan {

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<MatRM<T>>;
template <typename T>
using ConstMap = Eigen::Map<const MatRM<T>>;

// fr(n, t) = x[t * hop + n] for n < win.
template <typename T>
void gather_frames(const T* x, std::size_t win, std::size_t hop, std::size_t frames,
                   MatRM<T>& fr) {
  fr.resize(static_cast<Eigen::Index>(win), static_cast<Eigen::Index>(frames));
  for (std::size_t n = 0; n < win; ++n) {
    for (std::size_t t = 0; t < frames; ++t) fr(n, t) = x[t * hop + n];
  }
}

template <typename T>
void overlap_add(const MatRM<T>& fr, std::size_t hop, T* y) {
  for (Eigen::Index n = 0; n < fr.rows(); ++n) {
    for (Eigen::Index t = 0; t < fr.cols(); ++t) y[t * hop + n] += fr(n, t);
  }
}

// x [B, L] -> [B, rows, frames] via rows x win kernel applied to every frame.
template <typename T>
Var<T> frame_project(const Var<T>& x, std::shared_ptr<const MatRM<T>> kernel,
                     const StftConfig& cfg) {
  if (x.shape().size() != 2) {
    throw DimensionError("stft: expected waveform batch [B, L], got " + shape_str(x.shape()));
  }
  const std::size_t batch = x.shape()[0];
  const std::size_t len = x.shape()[1];
  const std::size_t frames = cfg.frames(len);
  const std::size_t rows = static_cast<std::size_t>(kernel->rows());
  const std::size_t win = cfg.win_len, hop = cfg.hop;
  Tensor<T> y(Shape{batch, rows, frames});
  MatRM<T> fr;
  for (std::size_t b = 0; b < batch; ++b) {
    gather_frames(x.value().ptr() + b * len, win, hop, frames, fr);
    Map<T>(y.ptr() + b * rows * frames, rows, frames).noalias() = (*kernel) * fr;
  }
  return make_result<T>(std::move(y), {x}, [kernel, batch, len, rows, frames, win, hop](Node<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    MatRM<T> gf(win, frames);
    for (std::size_t b = 0; b < batch; ++b) {
      gf.noalias() = kernel->transpose() * ConstMap<T>(n.grad.ptr() + b * rows * frames, rows, frames);
      overlap_add(gf, hop, p.grad_buffer().ptr() + b * len);
    }
  });
}

}  // namespace

StftConfig StftConfig::make(std::size_t win_len, std::size_t hop, std::size_t fft_len) {
  StftConfig cfg;
  cfg.win_len = win_len;
  cfg.hop = hop;
  cfg.fft_len = fft_len;
  cfg.window.resize(win_len);
  for (std::size_t n = 0; n < win_len; ++n) {
    cfg.window[n] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                                   static_cast<double>(win_len)));
  }
  cfg.validate();
  return cfg;
}

std::size_t StftConfig::frames(std::size_t len) const {
  if (len < win_len) {
    throw LengthError("stft: input of " + std::to_string(len) + " samples is shorter than one " +
                      std::to_string(win_len) + "-sample window");
  }
  return (len - win_len) / hop + 1;
}

double StftConfig::ola_gain() const {
  double g = 0;
  for (std::size_t n = 0; n < win_len; n += hop) g += window[n] * window[n];
  return g;
}

void StftConfig::validate() const {
  if (hop == 0 || hop > win_len || win_len > fft_len || fft_len % 2 != 0) {
    throw ConfigError("stft: need 0 < hop <= win_len <= fft_len with even fft_len (hop=" +
                      std::to_string(hop) + ", win=" + std::to_string(win_len) +
                      ", fft=" + std::to_string(fft_len) + ")");
  }
  if (window.size() != win_len) throw ConfigError("stft: window length differs from win_len");
  double lo = 1e300, hi = 0;
  for (std::size_t r = 0; r < hop; ++r) {
    double e = 0;
    for (std::size_t n = r; n < win_len; n += hop) e += window[n] * window[n];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (!(lo > 0) || (hi - lo) / hi > 1e-6) {
    throw ConfigError("stft: window does not satisfy constant overlap-add at hop " +
                      std::to_string(hop));
  }
}

template <typename T>
struct StftKernels<T>::Matrices {
  std::shared_ptr<const MatRM<T>> ana_re, ana_im, ana_dc;  // [bins, win], [1, win]
  MatRM<T> syn_re, syn_im, syn_dc;                         // [win, bins], [win, 1]
};

template <typename T>
StftKernels<T>::StftKernels(StftConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t win = cfg_.win_len, bins = cfg_.bins(), nfft = cfg_.fft_len;
  const double scale = 1.0 / (static_cast<double>(nfft) * cfg_.ola_gain());
  MatRM<T> are(bins, win), aim(bins, win), adc(1, win);
  auto m = std::make_shared<Matrices>();
  m->syn_re.resize(win, bins);
  m->syn_im.resize(win, bins);
  m->syn_dc.resize(win, 1);
  for (std::size_t n = 0; n < win; ++n) {
    const double w = cfg_.window[n];
    adc(0, n) = static_cast<T>(w);
    m->syn_dc(n, 0) = static_cast<T>(w * scale);
    for (std::size_t k = 1; k <= bins; ++k) {
      // Reduce k*n mod nfft first so the angle stays exact for large products.
      const double ang = 2.0 * std::numbers::pi * static_cast<double>((k * n) % nfft) /
                         static_cast<double>(nfft);
      const double c = std::cos(ang), s = std::sin(ang);
      const double fold = (k == nfft / 2) ? 1.0 : 2.0;  // conjugate-symmetric partner
      are(k - 1, n) = static_cast<T>(w * c);
      aim(k - 1, n) = static_cast<T>(-w * s);
      m->syn_re(n, k - 1) = static_cast<T>(w * fold * c * scale);
      m->syn_im(n, k - 1) = static_cast<T>(-w * fold * s * scale);
    }
  }
  m->ana_re = std::make_shared<const MatRM<T>>(std::move(are));
  m->ana_im = std::make_shared<const MatRM<T>>(std::move(aim));
  m->ana_dc = std::make_shared<const MatRM<T>>(std::move(adc));
  m_ = std::move(m);
}

template <typename T>
typename StftKernels<T>::Spectrum StftKernels<T>::analyze(const Var<T>& x) const {
  Var<T> re = frame_project(x, m_->ana_re, cfg_);
  Var<T> im = frame_project(x, m_->ana_im, cfg_);
  Var<T> dc = frame_project(x, m_->ana_dc, cfg_);
  const std::size_t batch = re.shape()[0], bins = re.shape()[1], frames = re.shape()[2];
  return {{ops::reshape(re, {batch, 1, bins, frames}), ops::reshape(im, {batch, 1, bins, frames})},
          ops::reshape(dc, {batch, frames})};
}

template <typename T>
Var<T> StftKernels<T>::synthesize(const CVar<T>& spec, const Var<T>& dc,
                                  std::size_t out_len) const {
  const Shape& s = spec.re.shape();
  const std::size_t bins = cfg_.bins();
  if (s.size() != 4 || s[1] != 1 || s[2] != bins || spec.im.shape() != s) {
    throw DimensionError("istft: expected spectrum [B, 1, " + std::to_string(bins) +
                         ", frames], got " + shape_str(s));
  }
  const std::size_t batch = s[0], frames = s[3];
  if (cfg_.frames(out_len) != frames) {
    throw DimensionError("istft: " + std::to_string(frames) + " frames inconsistent with " +
                         std::to_string(out_len) + " output samples");
  }
  if (dc.shape() != Shape{batch, frames}) {
    throw DimensionError("istft: DC row " + shape_str(dc.shape()) + " does not match spectrum " +
                         shape_str(s));
  }
  const std::size_t win = cfg_.win_len, hop = cfg_.hop;
  auto m = m_;
  Tensor<T> y(Shape{batch, out_len});
  MatRM<T> fr(win, frames);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t off = b * bins * frames;
    fr.noalias() = m->syn_re * ConstMap<T>(spec.re.value().ptr() + off, bins, frames);
    fr.noalias() += m->syn_im * ConstMap<T>(spec.im.value().ptr() + off, bins, frames);
    fr.noalias() += m->syn_dc * ConstMap<T>(dc.value().ptr() + b * frames, 1, frames);
    overlap_add(fr, hop, y.ptr() + b * out_len);
  }
  return make_result<T>(
      std::move(y), {spec.re, spec.im, dc}, [m, batch, bins, frames, win, hop, out_len](Node<T>& n) {
        MatRM<T> gf;
        for (std::size_t b = 0; b < batch; ++b) {
          gather_frames(n.grad.ptr() + b * out_len, win, hop, frames, gf);
          const std::size_t off = b * bins * frames;
          if (n.parents[0]->requires_grad) {
            Map<T>(n.parents[0]->grad_buffer().ptr() + off, bins, frames).noalias() +=
                m->syn_re.transpose() * gf;
          }
          if (n.parents[1]->requires_grad) {
            Map<T>(n.parents[1]->grad_buffer().ptr() + off, bins, frames).noalias() +=
                m->syn_im.transpose() * gf;
          }
          if (n.parents[2]->requires_grad) {
            Map<T>(n.parents[2]->grad_buffer().ptr() + b * frames, 1, frames).noalias() +=
                m->syn_dc.transpose() * gf;
          }
        }
      });
}

template <typename T>
ComplexTensor<T> stft(std::span<const T> x, const StftConfig& cfg) {
  NoGradGuard guard;
  StftKernels<T> k(cfg);
  auto spec = k.analyze(Var<T>::input(Tensor<T>(Shape{1, x.size()}, {x.begin(), x.end()})));
  const std::size_t bins = cfg.bins(), frames = spec.dc.shape()[1];
  return ComplexTensor<T>(spec.bins.re.value().reshaped({bins, frames}),
                          spec.bins.im.value().reshaped({bins, frames}));
}

template <typename T>
Tensor<T> stft_dc(std::span<const T> x, const StftConfig& cfg) {
  NoGradGuard guard;
  StftKernels<T> k(cfg);
  auto spec = k.analyze(Var<T>::input(Tensor<T>(Shape{1, x.size()}, {x.begin(), x.end()})));
  return spec.dc.value().reshaped({spec.dc.shape()[1]});
}

template <typename T>
std::vector<T> istft(const ComplexTensor<T>& spec, const Tensor<T>& dc, const StftConfig& cfg,
                     std::size_t out_len) {
  if (spec.shape().size() != 2) {
    throw DimensionError("istft: expected spectrum [bins, frames], got " + shape_str(spec.shape()));
  }
  const std::size_t bins = spec.shape()[0], frames = spec.shape()[1];
  if (dc.numel() != frames) {
    throw DimensionError("istft: DC row of " + std::to_string(dc.numel()) + " values for " +
                         std::to_string(frames) + " frames");
  }
  NoGradGuard guard;
  StftKernels<T> k(cfg);
  CVar<T> s{Var<T>::input(spec.re.reshaped({1, 1, bins, frames})),
            Var<T>::input(spec.im.reshaped({1, 1, bins, frames}))};
  Var<T> y = k.synthesize(s, Var<T>::input(dc.reshaped({1, frames})), out_len);
  return y.value().to_vector();
}

template <typename T>
std::vector<T> istft(const ComplexTensor<T>& spec, const StftConfig& cfg, std::size_t out_len) {
  if (spec.shape().size() != 2) {
    throw DimensionError("istft: expected spectrum [bins, frames], got " + shape_str(spec.shape()));
  }
  return istft(spec, Tensor<T>(Shape{spec.shape()[1]}), cfg, out_len);
}

template <typename T>
SpectrogramPair<T> SpectrogramPair<T>::analyze(std::span<const T> noisy,
                                               std::optional<std::span<const T>> clean,
                                               const StftConfig& cfg) {
  SpectrogramPair<T> out;
  out.noisy = stft(noisy, cfg);
  out.noisy_dc = stft_dc(noisy, cfg);
  if (clean) {
    if (clean->size() != noisy.size()) {
      throw DimensionError("SpectrogramPair: clean and noisy lengths differ");
    }
    out.clean = stft(*clean, cfg);
  }
  out.config = cfg;
  out.original_len = noisy.size();
  return out;
}

std::size_t slice_count(std::size_t len) {
  if (len <= kSliceLen) return 1;
  return (len - kSliceLen + kSliceHop - 1) / kSliceHop + 1;
}

template <typename T>
SlicedUtterance<T> slice_utterance(std::span<const T> x) {
  SlicedUtterance<T> out;
  out.original_len = x.size();
  const std::size_t n = slice_count(x.size());
  out.pad = (n - 1) * kSliceHop + kSliceLen - x.size();
  out.slices.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<T> slice(kSliceLen, T(0));
    const std::size_t begin = s * kSliceHop;
    const std::size_t end = std::min(begin + kSliceLen, x.size());
    if (begin < end) std::copy(x.begin() + begin, x.begin() + end, slice.begin());
    out.slices.push_back(std::move(slice));
  }
  return out;
}

template <typename T>
std::vector<T> reconstruct_utterance(const std::vector<std::vector<T>>& slices,
                                     std::size_t original_len) {
  const std::size_t n = slice_count(original_len);
  if (original_len == 0 || slices.size() != n) {
    throw GeometryError("reconstruct_utterance: " + std::to_string(slices.size()) +
                        " slices cannot cover " + std::to_string(original_len) +
                        " samples (expected " + std::to_string(n) + ")");
  }
  const std::size_t total = (n - 1) * kSliceHop + kSliceLen;
  std::vector<T> acc(total, T(0));
  std::vector<unsigned char> count(total, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (slices[s].size() != kSliceLen) {
      throw GeometryError("reconstruct_utterance: slice " + std::to_string(s) + " has " +
                          std::to_string(slices[s].size()) + " samples");
    }
    for (std::size_t i = 0; i < kSliceLen; ++i) {
      acc[s * kSliceHop + i] += slices[s][i];
      ++count[s * kSliceHop + i];
    }
  }
  std::vector<T> out(original_len);
  for (std::size_t i = 0; i < original_len; ++i) {
    out[i] = count[i] == 2 ? acc[i] / T(2) : acc[i];
  }
  return out;
}

#define DCCRGAN_INSTANTIATE(T)                                                                  \
  template class StftKernels<T>;                                                                \
  template ComplexTensor<T> stft(std::span<const T>, const StftConfig&);                        \
  template Tensor<T> stft_dc(std::span<const T>, const StftConfig&);                            \
  template std::vector<T> istft(const ComplexTensor<T>&, const StftConfig&, std::size_t);       \
  template std::vector<T> istft(const ComplexTensor<T>&, const Tensor<T>&, const StftConfig&,   \
                                std::size_t);                                                   \
  template struct SpectrogramPair<T>;                                                           \
  template SlicedUtterance<T> slice_utterance(std::span<const T>);                              \
  template std::vector<T> reconstruct_utterance(const std::vector<std::vector<T>>&, std::size_t);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

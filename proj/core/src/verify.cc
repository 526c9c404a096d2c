// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/verify.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "dccrgan/gradcheck.h"
#include "dccrgan/layers.h"
#include "dccrgan/losses.h"
#include "dccrgan/masking.h"
#include "dccrgan/metrics.h"
#include "dccrgan/models.h"
#include "dccrgan/data.h"
#include "dccrgan/stft.h"

namespace dccrgan {

namespace {

using V = Var<double>;
using D = Tensor<double>;

D random(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  D t(s);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& x : t.vec()) x = dist(rng);
  return t;
}

V param(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return V::parameter(random(s, rng, lo, hi));
}

// Random projection to a scalar so that no gradient cancels by symmetry.
struct Probe {
  std::vector<D> weights;
  Rng* rng;
  std::size_t next = 0;

  V operator()(const V& out) {
    if (next == weights.size()) weights.push_back(random(out.shape(), *rng));
    return ops::sum(ops::mul(out, V::input(weights[next++])));
  }
  V operator()(const CVar<double>& out) { return ops::add((*this)(out.re), (*this)(out.im)); }
  void reset() { next = 0; }
};

std::vector<V> vars_of(const std::vector<NamedParam<double>>& ps) {
  std::vector<V> out;
  for (const auto& p : ps) out.push_back(p.var);
  return out;
}

std::vector<V> concat_vars(std::vector<V> a, const std::vector<V>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

using Suite = std::vector<CheckResult>;

// Shorthand: a check whose loss is probe(f()) for a fresh probe each evaluation.
template <typename F>
void check(Suite& out, const std::string& module, const std::string& name, Rng& rng, F f,
           const std::vector<V>& wrt) {
  auto probe = std::make_shared<Probe>();
  probe->rng = &rng;
  out.push_back(gradient_check(
      module, name,
      [probe, f]() {
        probe->reset();
        return (*probe)(f());
      },
      wrt));
}

void core_checks(Suite& s) {
  const std::string m = "core";
  Rng rng(11);
  const Shape sh{2, 3, 4};
  V a = param(sh, rng), b = param(sh, rng);
  V pos = param(sh, rng, 0.5, 2.0);
  check(s, m, "add", rng, [=] { return ops::add(a, b); }, {a, b});
  check(s, m, "sub", rng, [=] { return ops::sub(a, b); }, {a, b});
  check(s, m, "mul", rng, [=] { return ops::mul(a, b); }, {a, b});
  check(s, m, "div", rng, [=] { return ops::div(a, pos); }, {a, pos});
  check(s, m, "scale", rng, [=] { return ops::scale(a, -1.7); }, {a});
  check(s, m, "add_scalar", rng, [=] { return ops::add_scalar(a, 0.3); }, {a});
  check(s, m, "sqrt", rng, [=] { return ops::sqrt(pos); }, {pos});
  check(s, m, "tanh", rng, [=] { return ops::tanh(a); }, {a});
  check(s, m, "sigmoid", rng, [=] { return ops::sigmoid(a); }, {a});
  V wide = param(sh, rng, -40.0, 40.0);
  check(s, m, "log_sigmoid", rng, [=] { return ops::log_sigmoid(wide); }, {wide});
  check(s, m, "leaky_relu", rng, [=] { return ops::leaky_relu(a, 0.3); }, {a});
  V alpha = param({3}, rng, 0.1, 0.5);
  check(s, m, "prelu", rng, [=] { return ops::prelu(a, alpha); }, {a, alpha});
  check(s, m, "polar_gain", rng, [=] { return ops::polar_gain(a, b); }, {a, b});
  V tiny_a = param(sh, rng, -1e-4, 1e-4), tiny_b = param(sh, rng, -1e-4, 1e-4);
  check(s, m, "polar_gain_small", rng, [=] { return ops::polar_gain(tiny_a, tiny_b); },
        {tiny_a, tiny_b});
  check(s, m, "sum", rng, [=] { return ops::scale(ops::sum(ops::mul(a, a)), 0.5); }, {a});
  check(s, m, "mean", rng, [=] { return ops::mean(ops::mul(a, b)); }, {a, b});
  check(s, m, "l1_mean", rng, [=] { return ops::l1_mean(a, b); }, {a, b});
  V sc = param({1}, rng);
  check(s, m, "sub_scalar", rng, [=] { return ops::sub_scalar(a, sc); }, {a, sc});
  check(s, m, "channel_mean", rng, [=] { return ops::channel_mean(ops::mul(a, a)); }, {a});
  V cv = param({3}, rng);
  check(s, m, "channel_mul", rng, [=] { return ops::channel_mul(a, cv); }, {a, cv});
  check(s, m, "channel_add", rng, [=] { return ops::channel_add(a, cv); }, {a, cv});
  V gamma = param({3}, rng, 0.5, 1.5), beta = param({3}, rng);
  check(s, m, "batch_norm", rng, [=] {
    D rm({3}), rv({3}, 1.0);
    return ops::batch_norm(a, gamma, beta, rm, rv, true, 1e-7);
  }, {a, gamma, beta});
  check(s, m, "reshape", rng, [=] { return ops::reshape(ops::mul(a, a), {4, 6}); }, {a});
  check(s, m, "permute", rng, [=] { return ops::permute(ops::mul(a, b), {2, 0, 1}); }, {a, b});
  check(s, m, "concat", rng, [=] { return ops::concat<double>({ops::mul(a, a), b}, 1); }, {a, b});
  check(s, m, "slice", rng, [=] { return ops::slice(ops::mul(a, b), 2, 1, 3); }, {a, b});
  V x2 = param({3, 4}, rng), w2 = param({2, 4}, rng), b2 = param({2}, rng);
  check(s, m, "linear", rng, [=] { return ops::linear(x2, w2, b2); }, {x2, w2, b2});
  ops::Conv2dGeometry g;
  V xc = param({2, 2, 4, 3}, rng), wc = param({2, 2, 5, 2}, rng);
  check(s, m, "conv2d", rng, [=] { return ops::conv2d(xc, wc, g); }, {xc, wc});
  V xt = param({2, 2, 2, 3}, rng), wt = param({2, 3, 5, 2}, rng);
  check(s, m, "conv_transpose2d", rng, [=] { return ops::conv_transpose2d(xt, wt, g, 4); },
        {xt, wt});
  V x1 = param({2, 2, 4}, rng), w1 = param({3, 2, 3}, rng);
  check(s, m, "conv1d", rng, [=] { return ops::conv1d(x1, w1, 2, 1); }, {x1, w1});
  V xl = param({2, 3, 4}, rng), wih = param({8, 4}, rng), whh = param({8, 2}, rng),
    bl = param({8}, rng);
  check(s, m, "lstm", rng, [=] { return ops::lstm(xl, wih, whh, bl, false); }, {xl, wih, whh, bl});
  check(s, m, "lstm_reverse", rng, [=] { return ops::lstm(xl, wih, whh, bl, true); },
        {xl, wih, whh, bl});
}

void stft_checks(Suite& s) {
  const std::string m = "stft";
  Rng rng(12);
  auto kernels = std::make_shared<StftKernels<double>>(StftConfig::make(16, 8, 16));
  V x = param({2, 40}, rng);
  check(s, m, "analyze", rng, [=] {
    auto sp = kernels->analyze(x);
    return ops::concat<double>({ops::reshape(sp.bins.re, {2, 32}), ops::reshape(sp.bins.im, {2, 32}),
                                sp.dc}, 1);
  }, {x});
  V re = param({2, 1, 8, 4}, rng), im = param({2, 1, 8, 4}, rng), dc = param({2, 4}, rng);
  check(s, m, "synthesize", rng, [=] { return kernels->synthesize({re, im}, dc, 40); },
        {re, im, dc});
}

void layer_checks(Suite& s) {
  const std::string m = "layers";
  Rng rng(13);
  auto cinput = [&](const Shape& sh) { return CVar<double>{param(sh, rng), param(sh, rng)}; };
  {
    auto conv = std::make_shared<ComplexConv2d<double>>(2, 2, rng);
    conv->bias_re.mutable_value() = random({2}, rng);
    conv->bias_im.mutable_value() = random({2}, rng);
    auto h = cinput({2, 2, 4, 3});
    check(s, m, "complex_conv2d", rng, [=] { return conv->forward(h); },
          concat_vars(vars_of(conv->params("c")), {h.re, h.im}));
  }
  {
    auto conv = std::make_shared<ComplexTransposedConv2d<double>>(2, 2, rng);
    auto h = cinput({2, 2, 2, 3});
    check(s, m, "complex_transposed_conv2d", rng, [=] { return conv->forward(h, 4); },
          concat_vars(vars_of(conv->params("t")), {h.re, h.im}));
  }
  for (auto mode : {BatchNormMode::naive, BatchNormMode::whitening}) {
    auto bn = std::make_shared<ComplexBatchNorm<double>>(2, mode);
    for (auto& a : bn->affine) a.mutable_value() = random(a.shape(), rng, 0.5, 1.5);
    auto h = cinput({2, 2, 3, 2});
    check(s, m, mode == BatchNormMode::naive ? "complex_batchnorm" : "complex_batchnorm_whitening",
          rng, [=] { return bn->forward(h, true); },
          concat_vars(vars_of(bn->params("bn")), {h.re, h.im}));
  }
  {
    auto act = std::make_shared<PRelu<double>>(2);
    auto h = cinput({2, 2, 3, 2});
    check(s, m, "prelu", rng, [=] { return act->forward(h); },
          concat_vars(vars_of(act->params("a")), {h.re, h.im}));
  }
  {
    auto lstm = std::make_shared<Lstm<double>>(3, 2, 2, true, rng);
    V x = param({2, 3, 3}, rng);
    check(s, m, "bilstm_stack", rng, [=] { return lstm->forward(x); },
          concat_vars(vars_of(lstm->params("l")), {x}));
  }
  for (auto [name, bi, sign] :
       {std::tuple{"complex_lstm", false, ComplexLstmSign::literal},
        std::tuple{"complex_lstm_conventional", false, ComplexLstmSign::conventional},
        std::tuple{"complex_bilstm", true, ComplexLstmSign::literal}}) {
    auto lstm = std::make_shared<ComplexLstm<double>>(3, 2, 2, bi, rng, sign);
    auto h = cinput({2, 3, 3});
    check(s, m, name, rng, [=] { return lstm->forward(h); },
          concat_vars(vars_of(lstm->params("cl")), {h.re, h.im}));
  }
  {
    auto lin = std::make_shared<ComplexLinear<double>>(3, 2, rng);
    lin->bias_re.mutable_value() = random({2}, rng);
    auto h = cinput({4, 3});
    check(s, m, "complex_linear", rng, [=] { return lin->forward(h); },
          concat_vars(vars_of(lin->params("cl")), {h.re, h.im}));
  }
  {
    auto conv = std::make_shared<SnConv1d<double>>(2, 3, 3, 2, 1, rng);
    V x = param({2, 2, 4}, rng);
    conv->forward(x, true);  // prime the power iteration once
    check(s, m, "sn_conv1d", rng, [=] { return conv->forward(x, false); },
          concat_vars(vars_of(conv->params("c")), {x}));
  }
  {
    auto lin = std::make_shared<SnLinear<double>>(4, 3, rng);
    V x = param({2, 4}, rng);
    lin->forward(x, true);
    check(s, m, "sn_linear", rng, [=] { return lin->forward(x, false); },
          concat_vars(vars_of(lin->params("l")), {x}));
  }
}

void masking_checks(Suite& s) {
  const std::string m = "masking";
  Rng rng(14);
  const Shape sh{2, 1, 4, 3};
  CVar<double> x{param(sh, rng), param(sh, rng)}, mk{param(sh, rng), param(sh, rng)};
  for (auto mode : {MaskMode::crm, MaskMode::polar, MaskMode::real}) {
    check(s, m, std::string("apply_mask_") + mask_mode_name(mode), rng,
          [=] { return apply_mask(x, mk, mode); }, {x.re, x.im, mk.re, mk.im});
  }
}

void loss_checks(Suite& s) {
  const std::string m = "losses";
  Rng rng(15);
  V r = param({4, 1}, rng, -3, 3), f = param({4, 1}, rng, -3, 3);
  auto scalar = [&s, &m](const std::string& name, std::function<V()> fn, std::vector<V> wrt) {
    s.push_back(gradient_check(m, name, fn, wrt));
  };
  scalar("relativistic_d", [=] { return relativistic_d_loss(r, f); }, {r, f});
  scalar("relativistic_g", [=] { return relativistic_g_adv_loss(r, f); }, {r, f});
  scalar("relativistic_average_g", [=] { return relativistic_average_losses(r, f).g_loss; }, {r, f});
  scalar("relativistic_average_d", [=] { return relativistic_average_losses(r, f).d_loss; }, {r, f});
  V out = param({2, 5}, rng), y = param({2, 5}, rng);
  scalar("generator_total", [=] {
    return generator_total_loss(relativistic_g_adv_loss(r, f), out, y, 100.0);
  }, {r, f, out, y});
}

GeneratorConfig gradcheck_generator(RecurrentKind kind, MaskMode mask) {
  GeneratorConfig cfg;
  cfg.encoder_channels = {2, 4};
  cfg.recurrent_kind = kind;
  cfg.recurrent_layers = 2;
  cfg.recurrent_units = 4;
  cfg.mask_mode = mask;
  cfg.stft = StftConfig::make(16, 8, 16);
  return cfg;
}

void model_checks(Suite& s) {
  const std::string m = "models";
  Rng rng(16);
  const std::size_t len = 48;
  DiscriminatorConfig dc;
  dc.channels = {2, 2};
  dc.filter_len = 5;
  dc.input_len = len;
  for (auto [kind, mask] : {std::pair{RecurrentKind::complex_bilstm, MaskMode::crm},
                            std::pair{RecurrentKind::real_lstm, MaskMode::polar},
                            std::pair{RecurrentKind::complex_lstm, MaskMode::real}}) {
    auto g = std::make_shared<Generator<double>>(gradcheck_generator(kind, mask), 3);
    auto d = std::make_shared<Discriminator<double>>(dc, 4);
    V x = V::input(random({2, len}, rng, -0.5, 0.5));
    V y = V::input(random({2, len}, rng, -0.5, 0.5));
    d->forward(y, x, true);
    auto loss = [=] {
      V gx = g->forward(x, true);
      V adv = relativistic_g_adv_loss(d->forward(y, x, false), d->forward(gx, x, false));
      return generator_total_loss(adv, gx, y, 1.0);
    };
    s.push_back(gradient_check(m, std::string("generator_") + recurrent_kind_name(kind) + "_" +
                                      mask_mode_name(mask),
                               loss, vars_of(g->params())));
  }
  {
    auto d = std::make_shared<Discriminator<double>>(dc, 5);
    V x = param({2, len}, rng), y = param({2, len}, rng);
    d->forward(y, x, true);
    auto loss = [=] {
      return relativistic_average_losses(d->forward(y, x, false), d->forward(x, y, false)).d_loss;
    };
    s.push_back(gradient_check(m, "discriminator", loss, concat_vars(vars_of(d->params()), {x, y})));
  }
}

CheckResult bound(const std::string& module, const std::string& name, double value,
                  double threshold, bool below = true) {
  return {module, name, value, threshold, below ? value < threshold : value >= threshold};
}

}  // namespace

CheckResult gradient_check(const std::string& module, const std::string& name,
                           const std::function<Var<double>()>& loss,
                           const std::vector<Var<double>>& wrt, std::size_t max_coords) {
  for (auto v : wrt) v.zero_grad();
  Var<double> l = loss();
  backward(l);
  std::vector<double> analytic, numeric;
  for (auto v : wrt) {
    const D grad = v.grad();
    const std::size_t n = v.value().numel();
    std::vector<std::size_t> coords;
    const std::size_t take = std::min(n, max_coords);
    for (std::size_t i = 0; i < take; ++i) coords.push_back(i * n / take);
    const D original = v.value();
    std::function<double(const D&)> f = [&](const D& t) {
      v.mutable_value() = t;
      NoGradGuard guard;
      return loss().value()[0];
    };
    const D fd = finite_difference_gradient<double>(f, original, 1e-5, coords);
    v.mutable_value() = original;
    for (std::size_t c : coords) {
      analytic.push_back(grad[c]);
      numeric.push_back(fd[c]);
    }
    v.zero_grad();
  }
  const double err = relative_error<double>(analytic, numeric);
  return {module, name, err, kGradTolerance, err < kGradTolerance};
}

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names{"core", "stft", "layers", "masking", "losses", "models"};
  return names;
}

std::vector<CheckResult> run_gradcheck_suite(const std::string& module) {
  using Fn = void (*)(Suite&);
  static const std::vector<std::pair<std::string, Fn>> suites{
      {"core", core_checks},       {"stft", stft_checks},     {"layers", layer_checks},
      {"masking", masking_checks}, {"losses", loss_checks},   {"models", model_checks}};
  Suite out;
  bool found = module.empty();
  for (const auto& [name, fn] : suites) {
    if (module.empty() || module == name) {
      fn(out);
      found = true;
    }
  }
  if (!found) {
    std::string list;
    for (const auto& n : gradcheck_modules()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("gradcheck: unknown module '" + module + "' (expected one of " + list + ")");
  }
  return out;
}

std::vector<CheckResult> run_selftest() {
  Suite out;
  const StftConfig cfg = StftConfig::paper();

  // Oracle complex ratio mask on a synthetic noisy pair.
  {
    const std::size_t len = 16000;
    const auto clean = synth_clean(7, len);
    const auto noisy = mix_at_snr(clean, synth_noise(NoiseType::white, 8, len), 5.0);
    const auto x = stft<double>(noisy, cfg);
    const auto y = stft<double>(clean, cfg);
    const auto m = oracle_crm(x, y);
    const auto est = apply_mask_crm(x, m);
    double worst = 0;
    for (std::size_t i = 0; i < x.re.numel(); ++i) {
      if (std::hypot(x.re[i], x.im[i]) <= 1e-3) continue;
      const double err = std::hypot(est.re[i] - y.re[i], est.im[i] - y.im[i]);
      const double ref = std::max(std::hypot(y.re[i], y.im[i]), 1e-12);
      worst = std::max(worst, err / std::max(ref, std::hypot(x.re[i], x.im[i])));
    }
    out.push_back(bound("selftest", "oracle_crm_spectrum_rel_error", worst, 1e-6));
    // The DC row takes the same ratio as every other bin.
    const auto xdc = stft_dc<double>(noisy, cfg), ydc = stft_dc<double>(clean, cfg);
    ComplexTensor<double> xd(xdc, D(xdc.shape())), yd(ydc, D(ydc.shape()));
    const auto dc = apply_mask_crm(xd, oracle_crm(xd, yd)).re;
    const auto wave = istft(est, dc, cfg, len);
    out.push_back(bound("selftest", "oracle_crm_si_sdr_db", si_sdr<double>(wave, clean), 60.0, false));
  }

  // STFT round trip and frame count.
  {
    Rng rng(9);
    const D x = random({16000}, rng);
    const auto spec = stft<double>(x.vec(), cfg);
    out.push_back(bound("selftest", "stft_frames_16000", std::abs(double(spec.shape()[1]) - 157.0),
                        0.5));
    const auto back = istft(spec, stft_dc<double>(x.vec(), cfg), cfg, 16000);
    double worst = 0;
    for (std::size_t i = cfg.win_len; i + cfg.win_len < 16000; ++i) {
      worst = std::max(worst, std::abs(back[i] - x[i]));
    }
    out.push_back(bound("selftest", "stft_round_trip_interior", worst, 1e-6));
  }

  // Slicing round trip at awkward lengths.
  {
    Rng rng(10);
    double worst = 0;
    for (std::size_t len : {1ul, 4000ul, 16000ul, 16001ul, 24000ul, 40000ul, 49999ul}) {
      const D x = random({len}, rng);
      const auto sliced = slice_utterance<double>(x.vec());
      const auto back = reconstruct_utterance(sliced.slices, len);
      for (std::size_t i = 0; i < len; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
    }
    out.push_back(bound("selftest", "slice_round_trip", worst, 1e-300));
  }

  // Loss identities.
  {
    V eq = V::input(D({3, 1}, 0.7));
    const double r_eq = relativistic_d_loss(eq, eq).value()[0];
    out.push_back(bound("selftest", "relativistic_equal_scores_log2",
                        std::abs(r_eq - std::numbers::ln2), 1e-10));
    Rng rng(11);
    double worst_ra = 0, worst_shift = 0;
    for (int trial = 0; trial < 20; ++trial) {
      V a = V::input(random({1, 1}, rng, -5, 5)), b = V::input(random({1, 1}, rng, -5, 5));
      const double ra = relativistic_average_losses(a, b).g_loss.value()[0];
      const double r = relativistic_g_adv_loss(a, b).value()[0];
      worst_ra = std::max(worst_ra, std::abs(ra - 2 * r));
      V ra4 = V::input(random({4, 1}, rng, -5, 5)), fa4 = V::input(random({4, 1}, rng, -5, 5));
      const double c = 3.25;
      V rs = ops::add_scalar(ra4, c), fs = ops::add_scalar(fa4, c);
      auto l0 = relativistic_average_losses(ra4, fa4), l1 = relativistic_average_losses(rs, fs);
      worst_shift = std::max({worst_shift,
                              std::abs(l0.g_loss.value()[0] - l1.g_loss.value()[0]),
                              std::abs(l0.d_loss.value()[0] - l1.d_loss.value()[0]),
                              std::abs(relativistic_d_loss(ra4, fa4).value()[0] -
                                       relativistic_d_loss(rs, fs).value()[0])});
    }
    out.push_back(bound("selftest", "ra_equals_twice_r_batch1", worst_ra, 1e-10));
    out.push_back(bound("selftest", "loss_shift_invariance", worst_shift, 1e-10));
  }
  return out;
}

std::string format_check(const CheckResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s  %s/%s  %.3e (threshold %.1e)", r.passed ? "PASS" : "FAIL",
                r.module.c_str(), r.name.c_str(), r.value, r.threshold);
  return buf;
}

}  // namespace dccrgan

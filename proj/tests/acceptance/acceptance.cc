// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include <Eigen/SVD>

#include "CLI11.hpp"
#include "common/oracles.h"
#include "dccrgan/data.h"
#include "dccrgan/losses.h"
#include "dccrgan/masking.h"
#include "dccrgan/metrics.h"
#include "dccrgan/stft.h"
#include "dccrgan/verify.h"
#include "dccrgan/wav.h"
#include "../../tools/cli.h"

namespace dccrgan {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using D = Tensor<double>;
using V = Var<double>;
using CV = CVar<double>;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Finite-difference gradient suite in 64-bit.
Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto results = run_gradcheck_suite();
  const double elapsed = seconds_since(t0);
  double worst = 0;
  std::size_t failed = 0;
  std::string first_fail;
  for (const auto& r : results) {
    worst = std::max(worst, r.value);
    if (!(r.value < 1e-4)) {
      if (failed++ == 0) first_fail = r.module + "/" + r.name;
    }
  }
  const bool ok = failed == 0 && elapsed < 300.0;
  std::string d = fmt("%zu checks, max rel err %.2e (< 1e-4), %.1f s (< 300 s)", results.size(), worst, elapsed);
  if (failed) d += ", first failure " + first_fail;
  return {ok, d};
}

// 2. Layer outputs against scalar-loop oracles on random instances.
Outcome complex_oracles() {
  Rng rng(2026);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  double conv_err = 0, lstm_err = 0, c1_err = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    ComplexConv2d<double> conv(pick(1, 3), pick(1, 3), rng);
    conv.bias_re.mutable_value() = oracle::random_tensor(conv.bias_re.shape(), rng);
    conv.bias_im.mutable_value() = oracle::random_tensor(conv.bias_im.shape(), rng);
    const Shape s{pick(1, 2), conv.A.shape()[1], pick(5, 12), pick(1, 4)};
    const D xr = oracle::random_tensor(s, rng), xi = oracle::random_tensor(s, rng);
    const auto got = conv.forward(CV{V::input(xr), V::input(xi)});
    const auto [yr, yi] = oracle::complex_conv2d(conv, xr, xi);
    conv_err = std::max({conv_err, oracle::max_abs_diff(got.re.value(), yr),
                         oracle::max_abs_diff(got.im.value(), yi)});
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t in = pick(1, 4);
    const auto sign = pick(0, 1) ? ComplexLstmSign::literal : ComplexLstmSign::conventional;
    ComplexLstm<double> m(in, pick(1, 3), pick(1, 2), pick(0, 1) == 1, rng, sign);
    const Shape s{pick(1, 2), pick(1, 5), in};
    const D xr = oracle::random_tensor(s, rng), xi = oracle::random_tensor(s, rng);
    const auto got = m.forward(CV{V::input(xr), V::input(xi)});
    const auto [yr, yi] = oracle::complex_lstm(m, xr, xi);
    lstm_err = std::max({lstm_err, oracle::max_abs_diff(got.re.value(), yr),
                         oracle::max_abs_diff(got.im.value(), yi)});
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t k = pick(1, 9), stride = pick(1, 3), pad = pick(0, k / 2);
    const D x = oracle::random_tensor({pick(1, 3), pick(1, 4), pick(k, 40)}, rng);
    const D w = oracle::random_tensor({pick(1, 4), x.shape()[1], k}, rng);
    const D got = ops::conv1d(V::input(x), V::input(w), stride, pad).value();
    c1_err = std::max(c1_err, oracle::max_abs_diff(got, oracle::conv1d(x, w, stride, pad)));
  }
  const bool ok = conv_err < 1e-10 && lstm_err < 1e-10 && c1_err < 1e-10;
  return {ok, fmt("%d instances each, max abs err complex_conv2d %.1e, complex_lstm %.1e, conv1d %.1e (< 1e-10)",
                  n, conv_err, lstm_err, c1_err)};
}

// 3. STFT round trip, slice round trip and frame count.
Outcome stft_fidelity() {
  const StftConfig cfg = StftConfig::paper();
  Rng rng(3);
  const D x = oracle::random_tensor({16000}, rng);
  const auto spec = stft<double>(x.vec(), cfg);
  const auto back = istft(spec, stft_dc<double>(x.vec(), cfg), cfg, 16000);
  double rt = 0;
  for (std::size_t i = cfg.win_len; i + cfg.win_len < 16000; ++i) rt = std::max(rt, std::abs(back[i] - x[i]));

  std::size_t hand = 0;
  for (std::size_t start = 0; start + 400 <= 16000; start += 100) ++hand;

  bool exact = true;
  for (std::size_t len : {1ul, 9999ul, 16000ul, 16001ul, 24000ul, 31999ul, 40000ul}) {
    const D y = oracle::random_tensor({len}, rng);
    const auto sliced = slice_utterance<double>(y.vec());
    exact = exact && reconstruct_utterance(sliced.slices, len) == y.to_vector();
  }
  const bool ok = rt < 1e-6 && exact && hand == 157 && spec.shape()[1] == hand && cfg.frames(16000) == hand;
  return {ok, fmt("interior round-trip %.1e (< 1e-6), slices %s, frames %zu (hand count %zu)", rt,
                  exact ? "exact" : "NOT exact", spec.shape()[1], hand)};
}

// 4. Oracle complex ratio mask.
Outcome oracle_mask() {
  const StftConfig cfg = StftConfig::paper();
  const auto clean = synth_clean(41, 16000);
  const auto noisy = mix_at_snr(clean, synth_noise(NoiseType::modulated, 42, 16000), 0.0);
  const auto xs = stft<double>(noisy, cfg), ys = stft<double>(clean, cfg);
  const auto est = apply_mask_crm(xs, oracle_crm(xs, ys));
  double worst = 0;
  std::size_t bins = 0;
  for (std::size_t i = 0; i < xs.re.numel(); ++i) {
    const double xm = std::hypot(xs.re[i], xs.im[i]);
    if (xm <= 1e-3) continue;
    ++bins;
    const double err = std::hypot(est.re[i] - ys.re[i], est.im[i] - ys.im[i]);
    worst = std::max(worst, err / std::max(std::hypot(ys.re[i], ys.im[i]), xm));
  }
  const auto xdc = stft_dc<double>(noisy, cfg), ydc = stft_dc<double>(clean, cfg);
  const ComplexTensor<double> xd(xdc, D(xdc.shape())), yd(ydc, D(ydc.shape()));
  const auto dc = apply_mask_crm(xd, oracle_crm(xd, yd)).re;
  const double sdr = si_sdr<double>(istft(est, dc, cfg, clean.size()), clean);
  return {worst < 1e-6 && sdr >= 60.0,
          fmt("spectral rel err %.1e over %zu bins (< 1e-6), SI-SDR %.1f dB (>= 60)", worst, bins, sdr)};
}

// 5. Relativistic loss identities.
Outcome loss_identities() {
  Rng rng(5);
  double eq = 0, ra2 = 0, shift = 0;
  for (int t = 0; t < 50; ++t) {
    const D s = oracle::random_tensor({4, 1}, rng, -10, 10);
    eq = std::max({eq, std::abs(relativistic_d_loss(V::input(s), V::input(s)).value()[0] - std::numbers::ln2),
                   std::abs(relativistic_g_adv_loss(V::input(s), V::input(s)).value()[0] - std::numbers::ln2)});
    const V a = V::input(oracle::random_tensor({1, 1}, rng, -5, 5));
    const V b = V::input(oracle::random_tensor({1, 1}, rng, -5, 5));
    const auto ra = relativistic_average_losses(a, b);
    ra2 = std::max({ra2, std::abs(ra.g_loss.value()[0] - 2 * relativistic_g_adv_loss(a, b).value()[0]),
                    std::abs(ra.d_loss.value()[0] - 2 * relativistic_d_loss(a, b).value()[0])});
    const D r = oracle::random_tensor({4, 1}, rng, -5, 5), f = oracle::random_tensor({4, 1}, rng, -5, 5);
    const double c = std::uniform_real_distribution<double>(-20, 20)(rng);
    D rs = r, fs = f;
    for (std::size_t i = 0; i < 4; ++i) {
      rs[i] += c;
      fs[i] += c;
    }
    const auto l0 = relativistic_average_losses(V::input(r), V::input(f));
    const auto l1 = relativistic_average_losses(V::input(rs), V::input(fs));
    shift = std::max({shift, std::abs(l0.g_loss.value()[0] - l1.g_loss.value()[0]),
                      std::abs(l0.d_loss.value()[0] - l1.d_loss.value()[0]),
                      std::abs(relativistic_d_loss(V::input(r), V::input(f)).value()[0] -
                               relativistic_d_loss(V::input(rs), V::input(fs)).value()[0])});
  }
  return {eq < 1e-10 && ra2 < 1e-10 && shift < 1e-10,
          fmt("|L - log 2| %.1e, |Ra - 2R| %.1e, shift %.1e (all < 1e-10)", eq, ra2, shift)};
}

// 6. Spectral normalisation against a full SVD. Power iteration converges
// like (sigma_2 / sigma_1)^(2k), so the gap of each draw is reported.
Outcome spectral_norm() {
  Rng rng(6);
  double worst = 0;
  std::size_t count = 0, within = 0;
  std::string misses;
  for (std::size_t rows : {1ul, 3ul, 8ul, 16ul, 31ul, 64ul}) {
    for (std::size_t cols : {1ul, 5ul, 16ul, 40ul, 64ul}) {
      const D w = oracle::random_tensor({rows, cols}, rng);
      SpectralNormState<double> s(rows, cols, rng);
      s.n_power_iters = 50;
      const D wn = spectral_normalize(V::input(w), s, true).value();
      Eigen::MatrixXd m(rows, cols), m0(rows, cols);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
          m(r, c) = wn[r * cols + c];
          m0(r, c) = w[r * cols + c];
        }
      const double err = std::abs(Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0) - 1.0);
      worst = std::max(worst, err);
      ++count;
      if (err < 1e-4) {
        ++within;
      } else {
        const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m0).singularValues();
        misses += fmt(" %zux%zu (sigma2/sigma1 %.3f, err %.1e)", rows, cols, sv(1) / sv(0), err);
      }
    }
  }
  std::string d = fmt("%zu/%zu matrices up to 64x64 within 1e-4, max |sigma_max - 1| %.1e", within, count, worst);
  if (!misses.empty()) d += "; missed:" + misses;
  return {within == count, d};
}

int cli(std::vector<std::string> args) { return cli::run(std::move(args)); }

std::map<std::string, double> read_means(const fs::path& report) {
  std::map<std::string, double> out;
  std::ifstream f(report);
  std::string id, metric;
  double value;
  while (f >> id >> metric >> value) {
    if (id == "mean") out[metric] = value;
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// 7. Toy-scale training with both relativistic losses.
Outcome toy_training(const fs::path& work) {
  const fs::path corpus = work / "corpus";
  if (cli({"synth-data", "--out", corpus.string(), "--n-train", "200", "--n-test", "40", "--seed", "1"}) != 0) {
    return {false, "synth-data failed"};
  }
  bool ok = true;
  std::string d;
  for (const std::string loss : {"r", "ra"}) {
    const fs::path run = work / ("train_" + loss);
    const auto t0 = Clock::now();
    const int rc = cli({"train", "--manifest", (corpus / "train.tsv").string(), "--out", run.string(),
                        "--scale", "toy", "--loss", loss, "--mask", "crm", "--epochs", "15", "--seed", "1"});
    const double minutes = seconds_since(t0) / 60.0;
    if (rc != 0 || cli({"evaluate", "--manifest", (corpus / "test.tsv").string(), "--checkpoint",
                        (run / "checkpoint.dcrg").string(), "--report", (run / "eval.tsv").string()}) != 0) {
      ok = false;
      d += loss + ": run failed; ";
      continue;
    }
    auto means = read_means(run / "eval.tsv");
    const double gain = means["si_sdr"] - means["noisy_si_sdr"];
    ok = ok && gain >= 3.0 && minutes < 30.0;
    d += fmt("%s: SI-SDR %.2f dB vs noisy %.2f dB, gain %+.2f dB (>= 3), %.1f min (< 30); ", loss.c_str(),
             means["si_sdr"], means["noisy_si_sdr"], gain, minutes);
  }
  d.resize(d.size() - 2);
  return {ok, d};
}

fs::path small_corpus(const fs::path& work) {
  const fs::path corpus = work / "small_corpus";
  if (!fs::exists(corpus / "train.tsv")) {
    cli({"synth-data", "--out", corpus.string(), "--n-train", "12", "--n-test", "2", "--seed", "8"});
  }
  return corpus;
}

// 8. Two identical seeded runs, differing only in the output directory.
Outcome determinism(const fs::path& work) {
  const fs::path corpus = small_corpus(work);
  const fs::path a = work / "det_a", b = work / "det_b_with_a_longer_directory_name";
  for (const auto& out : {a, b}) {
    if (cli({"train", "--manifest", (corpus / "train.tsv").string(), "--out", out.string(), "--scale", "toy",
             "--epochs", "3", "--seed", "11"}) != 0) {
      return {false, "training failed"};
    }
  }
  const bool report = slurp(a / "report.tsv") == slurp(b / "report.tsv");
  const std::string ca = slurp(a / "checkpoint.dcrg"), cb = slurp(b / "checkpoint.dcrg");
  const bool ckpt = !ca.empty() && ca == cb;
  return {report && ckpt, fmt("report.tsv %s, checkpoint.dcrg (%zu bytes) %s", report ? "identical" : "DIFFERS",
                              ca.size(), ckpt ? "identical" : "DIFFERS")};
}

// 9. Mask mode x recurrent kind grid, one epoch each.
Outcome configuration_grid(const fs::path& work) {
  const fs::path corpus = small_corpus(work);
  const auto probe = load_manifest(corpus / "test.tsv").front();
  const fs::path in = work / "grid_in.wav";
  write_wav(in, probe.noisy);
  std::size_t passed = 0;
  std::string failures;
  for (const std::string mask : {"crm", "polar", "real"}) {
    for (const std::string kind : {"lstm", "clstm", "cblstm"}) {
      const fs::path run = work / ("grid_" + mask + "_" + kind);
      const fs::path out = run / "enhanced.wav";
      bool ok = cli({"train", "--manifest", (corpus / "train.tsv").string(), "--out", run.string(), "--scale",
                     "toy", "--mask", mask, "--recurrent", kind, "--epochs", "1", "--seed", "2"}) == 0;
      ok = ok && cli({"enhance", "--checkpoint", (run / "checkpoint.dcrg").string(), "--in", in.string(), "--out",
                      out.string()}) == 0;
      if (ok) {
        const auto y = read_wav(out).samples;
        ok = y.size() == probe.noisy.size() && std::all_of(y.begin(), y.end(), [](float v) { return std::isfinite(v); });
      }
      if (ok) {
        ++passed;
      } else {
        failures += " " + mask + "/" + kind;
      }
    }
  }
  return {passed == 9, fmt("%zu/9 mask x recurrent configurations trained one epoch and kept length %zu%s", passed,
                           probe.noisy.size(), failures.empty() ? "" : (", failed:" + failures).c_str())};
}

}  // namespace
}  // namespace dccrgan

int main(int argc, char** argv) {
  using namespace dccrgan;
  CLI::App app{"dccrgan acceptance run"};
  fs::path work = fs::temp_directory_path() / "dccrgan_acceptance";
  std::set<int> only;
  app.add_option("--work-dir", work, "scratch directory (recreated)");
  app.add_option("--only", only, "criterion numbers to run (default all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"complex-arithmetic oracles", complex_oracles},
      {"STFT fidelity", stft_fidelity},
      {"oracle mask bound", oracle_mask},
      {"loss identities", loss_identities},
      {"spectral normalization", spectral_norm},
      {"toy end-to-end training", [&] { return toy_training(work); }},
      {"determinism", [&] { return determinism(work); }},
      {"configuration grid", [&] { return configuration_grid(work); }},
  };
  std::vector<std::string> lines;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.passed;
    lines.push_back(fmt("[%s] %d. %s: %s", o.passed ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                        o.detail.c_str()));
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nacceptance summary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d/%zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}

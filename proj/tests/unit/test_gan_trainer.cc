// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "../common/oracles.h"
#include "dccrgan/checkpoint.h"
#include "dccrgan/error.h"
#include "dccrgan/losses.h"
#include "dccrgan/trainer.h"

namespace dccrgan {
namespace {

using D = Tensor<double>;
using V = Var<double>;

V scores(std::vector<double> v) { return V::input(D({v.size(), 1}, v)); }
double value(const V& v) { return v.value()[0]; }

double naive_softplus_neg_logsig(double d) { return -std::log(1.0 / (1.0 + std::exp(-d))); }

TEST(Losses, RelativisticMatchesNaiveFormula) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const D r = oracle::random_tensor({5, 1}, rng, -6, 6), f = oracle::random_tensor({5, 1}, rng, -6, 6);
    double d = 0, g = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      d += naive_softplus_neg_logsig(r[i] - f[i]) / 5;
      g += naive_softplus_neg_logsig(f[i] - r[i]) / 5;
    }
    EXPECT_NEAR(value(relativistic_d_loss(V::input(r), V::input(f))), d, 1e-10);
    EXPECT_NEAR(value(relativistic_g_adv_loss(V::input(r), V::input(f))), g, 1e-10);
    // The generator loss is the discriminator loss with roles swapped.
    EXPECT_EQ(value(relativistic_g_adv_loss(V::input(r), V::input(f))),
              value(relativistic_d_loss(V::input(f), V::input(r))));
  }
}

TEST(Losses, RelativisticAverageMatchesNaiveFormula) {
  std::mt19937_64 rng(2);
  const D r = oracle::random_tensor({6, 1}, rng, -4, 4), f = oracle::random_tensor({6, 1}, rng, -4, 4);
  double mr = 0, mf = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    mr += r[i] / 6;
    mf += f[i] / 6;
  }
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  double g = 0, d = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double dy = sig(r[i] - mf), dx = sig(f[i] - mr);
    g += (-std::log(dx) - std::log(1 - dy)) / 6;
    d += (-std::log(dy) - std::log(1 - dx)) / 6;
  }
  const auto l = relativistic_average_losses(V::input(r), V::input(f));
  EXPECT_NEAR(value(l.g_loss), g, 1e-10);
  EXPECT_NEAR(value(l.d_loss), d, 1e-10);
}

TEST(Losses, EqualScoresGiveLogTwo) {
  EXPECT_NEAR(value(relativistic_d_loss(scores({0.3, -2}), scores({0.3, -2}))), std::numbers::ln2, 1e-15);
  const auto ra = relativistic_average_losses(scores({1.7}), scores({1.7}));
  EXPECT_NEAR(value(ra.g_loss), 2 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(value(ra.d_loss), 2 * std::numbers::ln2, 1e-15);
}

TEST(Losses, FiniteAcrossScoreRange) {
  for (double a : {-80.0, -10.0, 0.0, 10.0, 80.0}) {
    for (double b : {-80.0, 0.0, 80.0}) {
      EXPECT_TRUE(std::isfinite(value(relativistic_d_loss(scores({a}), scores({b})))));
      const auto ra = relativistic_average_losses(scores({a, b}), scores({b, a}));
      EXPECT_TRUE(std::isfinite(value(ra.g_loss)));
      EXPECT_TRUE(std::isfinite(value(ra.d_loss)));
    }
  }
  EXPECT_LT(value(relativistic_d_loss(scores({80}), scores({-80}))), 1e-60);
}

TEST(Losses, GeneratorGradientPushesFakeScoresUp) {
  V fake = V::parameter(D({3, 1}, std::vector<double>{0.1, -0.5, 2.0}));
  backward(relativistic_g_adv_loss(scores({0.0, 1.0, -1.0}), fake));
  for (double g : fake.grad().vec()) EXPECT_LT(g, 0.0);
}

TEST(Losses, TotalLossArithmetic) {
  const V adv = V::input(D({1}, 0.69));
  const V out = V::input(D({1, 4}, std::vector<double>{0.01, -0.01, 0.51, 0.0}));
  const V y = V::input(D({1, 4}, std::vector<double>{0.0, 0.0, 0.5, 0.01}));
  EXPECT_NEAR(value(generator_total_loss(adv, out, y, 100.0)), 1.69, 1e-12);
  EXPECT_EQ(value(generator_total_loss(adv, out, y, 0.0)), 0.69);
  EXPECT_EQ(value(generator_total_loss(adv, y, y, 100.0)), 0.69);
  EXPECT_EQ(parse_loss_kind("ra"), LossKind::relativistic_average);
  EXPECT_THROW(parse_loss_kind("wgan"), ConfigError);
}

GeneratorConfig tiny_generator() {
  GeneratorConfig cfg;
  cfg.encoder_channels = {2, 4};
  cfg.recurrent_units = 4;
  cfg.stft = StftConfig::make(16, 8, 16);
  return cfg;
}

DiscriminatorConfig tiny_discriminator(std::size_t len) {
  DiscriminatorConfig cfg;
  cfg.channels = {2, 4};
  cfg.filter_len = 5;
  cfg.input_len = len;
  return cfg;
}

std::pair<D, D> batch_pair(std::size_t b, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  D clean = oracle::random_tensor({b, len}, rng, -0.5, 0.5), noisy = clean;
  const D n = oracle::random_tensor({b, len}, rng, -0.2, 0.2);
  for (std::size_t i = 0; i < noisy.numel(); ++i) noisy[i] += n[i];
  return {noisy, clean};
}

TEST(TrainStep, ZeroLearningRateLeavesParameters) {
  Generator<double> g(tiny_generator(), 1);
  Discriminator<double> d(tiny_discriminator(64), 2);
  TrainConfig cfg;
  cfg.lr = 0;
  GanTrainer<double> t(g, d, cfg);
  std::vector<D> before;
  for (const auto& p : g.params()) before.push_back(p.var.value());
  for (const auto& p : d.params()) before.push_back(p.var.value());
  const auto [x, y] = batch_pair(2, 64, 1);
  const auto losses = t.train_step(x, y);
  EXPECT_TRUE(std::isfinite(losses.g_total));
  EXPECT_TRUE(std::isfinite(losses.d_loss));
  std::size_t i = 0;
  for (const auto& p : g.params()) EXPECT_EQ(p.var.value(), before[i++]) << p.name;
  for (const auto& p : d.params()) EXPECT_EQ(p.var.value(), before[i++]) << p.name;
}

TEST(TrainStep, DominantL1ReducesError) {
  Generator<double> g(tiny_generator(), 3);
  Discriminator<double> d(tiny_discriminator(64), 4);
  TrainConfig cfg;
  cfg.lambda_l1 = 1e6;
  cfg.lr = 1e-3;
  GanTrainer<double> t(g, d, cfg);
  const auto [x, y] = batch_pair(2, 64, 2);
  double previous = INFINITY;
  for (int step = 0; step < 5; ++step) {
    const double l1 = t.train_step(x, y).l1;
    EXPECT_LT(l1, previous);
    previous = l1;
  }
}

TEST(TrainStep, SameSeedSameLosses) {
  auto run = [] {
    Generator<double> g(tiny_generator(), 5);
    Discriminator<double> d(tiny_discriminator(64), 6);
    GanTrainer<double> t(g, d, TrainConfig{});
    const auto [x, y] = batch_pair(2, 64, 3);
    std::vector<double> out;
    for (int i = 0; i < 3; ++i) {
      const auto s = t.train_step(x, y);
      out.insert(out.end(), {s.g_total, s.d_loss, s.l1});
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainStep, NonFiniteInputNamesTheTerm) {
  Generator<double> g(tiny_generator(), 7);
  Discriminator<double> d(tiny_discriminator(64), 8);
  GanTrainer<double> t(g, d, TrainConfig{});
  auto [x, y] = batch_pair(2, 64, 4);
  y[3] = std::nan("");
  try {
    t.train_step(x, y);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("loss"), std::string::npos) << e.what();
  }
  // D parameters are trainable again after the failure.
  for (const auto& p : d.params()) EXPECT_TRUE(p.var.requires_grad());
}

TEST(LrSchedule, HalvesOnlyOnIncrease) {
  LrSchedule s(1e-3, 0.5);
  for (double loss : {5.0, 4.0, 3.0, 2.0}) EXPECT_EQ(s.update(loss), 1e-3);
  EXPECT_EQ(s.update(2.5), 5e-4);
  EXPECT_EQ(s.update(2.5), 5e-4);  // equal is not an increase
  EXPECT_EQ(s.update(2.6), 2.5e-4);
}

// Scripted critic: real and fake scores per epoch, independent of input.
// Each training step queries D four times (real, fake for the D update,
// then real, fake for the G update).
class ScriptedDiscriminator : public DiscriminatorBase<double> {
 public:
  ScriptedDiscriminator(std::vector<double> gaps, std::size_t calls_per_epoch)
      : gaps_(std::move(gaps)), calls_per_epoch_(calls_per_epoch) {}

  V forward(const V& candidate, const V&, bool) override {
    const std::size_t epoch = std::min(calls_ / calls_per_epoch_, gaps_.size() - 1);
    const bool real = calls_ % 2 == 0;
    ++calls_;
    return V::input(D({candidate.shape()[0], 1}, real ? gaps_[epoch] : 0.0));
  }
  std::vector<NamedParam<double>> params() const override { return {}; }

 private:
  std::vector<double> gaps_;
  std::size_t calls_per_epoch_;
  std::size_t calls_ = 0;
};

Utterance utterance(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Utterance u;
  u.id = "u" + std::to_string(seed);
  for (std::size_t i = 0; i < len; ++i) {
    u.clean.push_back(std::uniform_real_distribution<float>(-0.5f, 0.5f)(rng));
    u.noisy.push_back(u.clean.back() + std::uniform_real_distribution<float>(-0.1f, 0.1f)(rng));
  }
  return u;
}

TEST(TrainLoop, LearningRateFollowsScriptedLoss) {
  // Generator loss rises after epochs 2, 4 and 5.
  const std::vector<double> gaps{0.0, 1.0, 0.5, 2.0, 3.0, -1.0};
  Generator<double> g(tiny_generator(), 9);
  ScriptedDiscriminator d(gaps, 4);
  TrainConfig cfg;
  cfg.epochs = gaps.size();
  cfg.batch_size = 4;
  cfg.lambda_l1 = 1e-9;
  const auto data = SliceSet<double>::from_utterances({utterance(16000, 1), utterance(16000, 2),
                                                        utterance(16000, 3), utterance(16000, 4)});
  GanTrainer<double> t(g, d, cfg);
  const TrainReport report = train_loop(t, data, {});
  ASSERT_EQ(report.epochs.size(), gaps.size());
  double lr = cfg.lr;
  for (std::size_t e = 0; e < gaps.size(); ++e) {
    EXPECT_EQ(report.epochs[e].lr, lr) << e;
    if (e > 0 && gaps[e] > gaps[e - 1]) lr *= 0.5;
  }
  EXPECT_TRUE(std::isnan(report.epochs[0].val_si_sdr));
}

TEST(TrainLoop, SingleBatchSingleEpoch) {
  Generator<double> g(tiny_generator(), 10);
  Discriminator<double> d(tiny_discriminator(kSliceLen), 11);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  const auto data = SliceSet<double>::from_utterances({utterance(12000, 5)});
  GanTrainer<double> t(g, d, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "dccrgan_loop_test";
  std::filesystem::remove_all(dir);
  TrainLoopOptions opt;
  opt.out_dir = dir;
  const TrainReport report = train_loop(t, data, {utterance(20000, 6)}, opt);
  ASSERT_EQ(report.epochs.size(), 1u);
  EXPECT_TRUE(std::isfinite(report.epochs[0].val_si_sdr));
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint.dcrg"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.tsv"));
  std::filesystem::remove_all(dir);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda_l1 = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TrainReport, TsvFormat) {
  TrainReport r;
  r.epochs.push_back({1, 1.5, 0.25, 0.0123456789, std::nan(""), 0.001});
  r.epochs.push_back({2, -0.5, 1.0, 0.0, 3.14159265, 0.0005});
  EXPECT_EQ(r.to_tsv(),
            "1\t1.500000\t0.250000\t0.012346\tnan\t0.001000\n"
            "2\t-0.500000\t1.000000\t0.000000\t3.141593\t0.000500\n");
}

TEST(Split, FloorFractionHeldOutDeterministically) {
  std::vector<Utterance> utts;
  for (int i = 0; i < 25; ++i) utts.push_back(utterance(10, i));
  const auto a = split_validation(utts, 0.1, 7), b = split_validation(utts, 0.1, 7);
  EXPECT_EQ(a.validation.size(), 2u);
  EXPECT_EQ(a.train.size(), 23u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.validation[i].id, b.validation[i].id);
}

TEST(Enhance, PreservesLength) {
  Generator<double> g(tiny_generator(), 12);
  const auto u = utterance(40000, 8);
  std::vector<double> x(u.noisy.begin(), u.noisy.end());
  std::mt19937_64 rng(1);
  g.forward(V::input(oracle::random_tensor({2, 64}, rng)), true);  // batch-norm statistics
  EXPECT_EQ(enhance_utterance<double>(g, x).size(), 40000u);
}

// ---- checkpoint -----------------------------------------------------------

std::vector<unsigned char> le(std::uint64_t v, int bytes) {
  std::vector<unsigned char> out;
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  return out;
}

TEST(Checkpoint, HandBuiltBytes) {
  Checkpoint ck;
  ck.put("w", Tensor<float>({2}, std::vector<float>{1.0f, -2.0f}));
  std::vector<unsigned char> expect{'D', 'C', 'R', 'G'};
  auto append = [&](std::vector<unsigned char> v) { expect.insert(expect.end(), v.begin(), v.end()); };
  append(le(1, 4));  // version
  append(le(1, 4));  // count
  append(le(1, 2));  // name length
  expect.push_back('w');
  expect.push_back(0);  // f32
  expect.push_back(1);  // rank
  append(le(2, 8));
  append({0x00, 0x00, 0x80, 0x3f});  // 1.0f
  append({0x00, 0x00, 0x00, 0xc0});  // -2.0f
  EXPECT_EQ(ck.serialize(), expect);
  EXPECT_EQ(Checkpoint::parse(expect).serialize(), expect);
}

TEST(Checkpoint, RoundTripAndErrors) {
  Checkpoint ck;
  std::mt19937_64 rng(1);
  ck.put("a.b", oracle::random_tensor({3, 2}, rng));
  ck.put("c", oracle::random_tensor({4}, rng).cast<float>());
  const auto bytes = ck.serialize();
  const Checkpoint back = Checkpoint::parse(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(back.get<double>("a.b"), ck.get<double>("a.b"));
  EXPECT_THROW(back.get<double>("missing"), IoError);
  std::vector<unsigned char> truncated(bytes.begin(), bytes.end() - 3);
  EXPECT_THROW(Checkpoint::parse(truncated), ParseError);
  std::vector<unsigned char> bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(Checkpoint::parse(bad), ParseError);
}

TEST(Checkpoint, GeneratorSurvivesRoundTrip) {
  Generator<double> g(tiny_generator(), 13);
  Discriminator<double> d(tiny_discriminator(64), 14);
  GanTrainer<double> t(g, d, TrainConfig{});
  const auto [x, y] = batch_pair(2, 64, 5);
  t.train_step(x, y);
  LrSchedule sched(1e-3, 0.5);
  const Checkpoint ck = Checkpoint::parse(make_checkpoint(t, 1, sched).serialize());
  EXPECT_EQ(checkpoint_precision(ck), Precision::f64);
  auto g2 = generator_from_checkpoint<double>(ck);
  EXPECT_EQ(g2->config().encoder_channels, g.config().encoder_channels);
  const D a = g.forward(V::input(x), false).value(), b = g2->forward(V::input(x), false).value();
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace dccrgan

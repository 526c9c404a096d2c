// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include <random>

#include "dccrgan/layers.h"
#include "dccrgan/models.h"
#include "dccrgan/ops.h"
#include "dccrgan/stft.h"
#include "dccrgan/trainer.h"

namespace dccrgan {
namespace {

template <typename T>
Tensor<T> noise(const Shape& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Tensor<T> t(s);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(u(rng));
  return t;
}

// Encoder-sized convolution: [B, C, F, T] with a 5x2 kernel, forward and backward.
void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto x = Var<float>::parameter(noise<float>({4, c, 64, 160}, 1));
  auto w = Var<float>::parameter(noise<float>({2 * c, c, 5, 2}, 2));
  for (auto _ : state) {
    auto y = ops::conv2d(x, w, ops::Conv2dGeometry{});
    backward(ops::sum(y));
    benchmark::DoNotOptimize(x.grad().ptr());
  }
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Lstm(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  Lstm<float> lstm(hidden, hidden, 2, false, rng);
  auto x = Var<float>::parameter(noise<float>({4, 160, hidden}, 4));
  for (auto _ : state) {
    backward(ops::sum(lstm.forward(x)));
    benchmark::DoNotOptimize(x.grad().ptr());
  }
}
BENCHMARK(BM_Lstm)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& state) {
  const StftConfig cfg = StftConfig::paper();
  const auto x = noise<float>({16000}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(stft<float>(x.vec(), cfg));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_Stft)->Unit(benchmark::kMillisecond);

void BM_ToyTrainStep(benchmark::State& state) {
  Generator<float> g(GeneratorConfig::toy(), 6);
  Discriminator<float> d(DiscriminatorConfig::toy(), 7);
  TrainConfig cfg;
  cfg.batch_size = 8;
  GanTrainer<float> trainer(g, d, cfg);
  const auto noisy = noise<float>({8, kSliceLen}, 8), clean = noise<float>({8, kSliceLen}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(noisy, clean));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ToyTrainStep)->Unit(benchmark::kMillisecond);

void BM_ToyEnhance(benchmark::State& state) {
  Generator<float> g(GeneratorConfig::toy(), 10);
  g.forward(Var<float>::input(noise<float>({2, kSliceLen}, 11)), true);
  const auto x = noise<float>({48000}, 12);
  for (auto _ : state) benchmark::DoNotOptimize(enhance_utterance<float>(g, x.vec()));
}
BENCHMARK(BM_ToyEnhance)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dccrgan

BENCHMARK_MAIN();

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_TRAINER_H_
#define DCCRGAN_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dccrgan/adam.h"
#include "dccrgan/checkpoint.h"
#include "dccrgan/data.h"
#include "dccrgan/losses.h"
#include "dccrgan/models.h"

namespace dccrgan {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double lr_decay = 0.5;
  double lambda_l1 = 100.0;
  LossKind loss = LossKind::relativistic;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double g_loss = 0;      // epoch mean of the total generator loss
  double d_loss = 0;
  double l1 = 0;          // epoch mean of the unweighted L1 term
  double val_si_sdr = 0;  // NaN without a validation split
  double lr = 0;          // learning rate used during the epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;

  /// One line per epoch: epoch, g_loss, d_loss, l1, val_si_sdr, lr with six
  /// decimals, tab-separated.
  std::string to_tsv() const;
  void write(const std::filesystem::path& path) const;
};

/// Halves the learning rate whenever the epoch loss exceeds the previous one.
class LrSchedule {
 public:
  LrSchedule(double lr, double decay) : lr_(lr), decay_(decay) {}
  /// Feeds one epoch loss; returns the learning rate for the next epoch.
  double update(double epoch_loss);
  double lr() const { return lr_; }
  /// Last loss seen (NaN before the first update).
  double previous() const { return previous_; }
  void restore(double lr, double previous) {
    lr_ = lr;
    previous_ = previous;
  }

 private:
  double lr_;
  double decay_;
  double previous_ = std::numeric_limits<double>::quiet_NaN();
};

struct StepLosses {
  double g_total = 0;
  double g_adv = 0;
  double l1 = 0;
  double d_loss = 0;
};

/// One generator/discriminator pair with their optimisers.
template <typename T>
class GanTrainer {
 public:
  GanTrainer(Generator<T>& g, DiscriminatorBase<T>& d, TrainConfig cfg);

  /// One discriminator update on the adversarial D loss (fake detached), then
  /// one generator update on adv + lambda L1 with D frozen. noisy and clean
  /// are [B, L]. NumericError naming the term if a loss is not finite.
  StepLosses train_step(const Tensor<T>& noisy, const Tensor<T>& clean);

  void set_lr(double lr);
  double lr() const { return static_cast<double>(g_opt_.lr()); }

  Generator<T>& generator() { return g_; }
  DiscriminatorBase<T>& discriminator() { return d_; }
  Adam<T>& g_optimizer() { return g_opt_; }
  Adam<T>& d_optimizer() { return d_opt_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  Generator<T>& g_;
  DiscriminatorBase<T>& d_;
  TrainConfig cfg_;
  Adam<T> g_opt_;
  Adam<T> d_opt_;
};

/// 16000-sample training pairs cut from utterances with slice_utterance().
template <typename T>
struct SliceSet {
  std::vector<std::vector<T>> noisy;
  std::vector<std::vector<T>> clean;

  static SliceSet from_utterances(const std::vector<Utterance>& utts);
  std::size_t size() const { return noisy.size(); }
};

/// Deterministic split: floor(fraction * n) utterances held out for validation.
struct DataSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> validation;
};
DataSplit split_validation(std::vector<Utterance> utts, double fraction, std::uint64_t seed);

/// Enhances a whole utterance: slices, runs G in evaluation mode in batches,
/// and overlap-adds the slices back to the input length.
template <typename T>
std::vector<T> enhance_utterance(Generator<T>& g, std::span<const T> noisy,
                                 std::size_t batch = 16);

/// Mean SI-SDR of enhanced validation utterances; NaN when empty.
template <typename T>
double validation_si_sdr(Generator<T>& g, const std::vector<Utterance>& val);

struct TrainLoopOptions {
  /// Directory for checkpoint.dcrg and report.tsv, rewritten after every epoch.
  std::optional<std::filesystem::path> out_dir;
  /// Called after every epoch (e.g. for progress output).
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Runs cfg.epochs epochs over seeded shuffles of `data`. After each epoch the
/// mean generator total loss feeds an LrSchedule shared by both optimisers.
template <typename T>
TrainReport train_loop(GanTrainer<T>& trainer, const SliceSet<T>& data,
                       const std::vector<Utterance>& validation,
                       const TrainLoopOptions& options = {});

/// Model configuration, parameters, buffers and optimiser state.
template <typename T>
Checkpoint make_checkpoint(GanTrainer<T>& trainer, std::size_t epoch, const LrSchedule& schedule);

/// Generator configuration stored under "meta.g.*".
GeneratorConfig generator_config_from(const Checkpoint& ck);
DiscriminatorConfig discriminator_config_from(const Checkpoint& ck);
/// Element type the checkpoint's model tensors were written in.
Precision checkpoint_precision(const Checkpoint& ck);

/// Copies "g.*" parameters and buffers into `g`; IoError on a missing or
/// mis-shaped tensor.
template <typename T>
void load_generator(const Checkpoint& ck, Generator<T>& g);

/// Rebuilds the generator stored in a checkpoint.
template <typename T>
std::unique_ptr<Generator<T>> generator_from_checkpoint(const Checkpoint& ck);

extern template class GanTrainer<float>;
extern template class GanTrainer<double>;

}  // namespace dccrgan

#endif  // DCCRGAN_TRAINER_H_

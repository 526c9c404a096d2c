// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "dccrgan/metrics.h"

namespace dccrgan {

namespace {

template <typename T>
Tensor<T> stack_rows(const std::vector<std::vector<T>>& rows, const std::vector<std::size_t>& idx,
                     std::size_t begin, std::size_t end) {
  const std::size_t len = rows[idx[begin]].size();
  Tensor<T> t(Shape{end - begin, len});
  for (std::size_t b = begin; b < end; ++b) {
    std::copy(rows[idx[b]].begin(), rows[idx[b]].end(), t.ptr() + (b - begin) * len);
  }
  return t;
}

template <typename T>
void require_finite(const Var<T>& v, const char* term) {
  if (!std::isfinite(static_cast<double>(v.value()[0]))) {
    throw NumericError(std::string("train_step: ") + term + " is not finite (" +
                       std::to_string(static_cast<double>(v.value()[0])) + ")");
  }
}

template <typename T>
Tensor<T> vector_tensor(const std::vector<double>& v) {
  Tensor<T> t(Shape{v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = static_cast<T>(v[i]);
  return t;
}

std::vector<double> read_vector(const Checkpoint& ck, const std::string& name) {
  return ck.get<double>(name).to_vector();
}

std::size_t as_size(double v) { return static_cast<std::size_t>(std::llround(v)); }

template <typename T>
void put_params(Checkpoint& ck, const std::string& prefix, const std::vector<NamedParam<T>>& ps) {
  for (const auto& p : ps) ck.put(prefix + p.name, p.var.value());
}

template <typename T>
void put_buffers(Checkpoint& ck, const std::string& prefix, const std::vector<NamedBuffer<T>>& bs) {
  for (const auto& b : bs) ck.put(prefix + b.name, *b.tensor);
}

template <typename T>
void put_optimizer(Checkpoint& ck, const std::string& prefix, const Adam<T>& opt) {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const auto& name = opt.params()[i].name;
    const auto& s = opt.states()[i];
    ck.put(prefix + name + ".m", s.m);
    ck.put(prefix + name + ".v", s.v);
    ck.put(prefix + name + ".step", Tensor<T>::scalar(static_cast<T>(s.step)));
  }
}

template <typename T>
Tensor<T> get_shaped(const Checkpoint& ck, const std::string& name, const Shape& shape) {
  Tensor<T> t = ck.get<T>(name);
  if (t.shape() != shape) {
    throw IoError("checkpoint: tensor '" + name + "' has shape " + shape_str(t.shape()) +
                  ", model expects " + shape_str(shape));
  }
  return t;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be at least 1");
  if (!(lr >= 0) || !std::isfinite(lr)) throw ConfigError("train: learning rate must be >= 0");
  if (!(lambda_l1 >= 0) || !std::isfinite(lambda_l1)) throw ConfigError("train: lambda-l1 must be >= 0");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("train: lr decay must be in (0, 1]");
  if (!(val_fraction >= 0 && val_fraction < 1)) {
    throw ConfigError("train: validation fraction must be in [0, 1)");
  }
}

std::string TrainReport::to_tsv() const {
  std::string out;
  char buf[256];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n", e.epoch, e.g_loss,
                  e.d_loss, e.l1, e.val_si_sdr, e.lr);
    out += buf;
  }
  return out;
}

void TrainReport::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("report: cannot open " + path.string() + " for writing");
  f << to_tsv();
  f.flush();
  if (!f) throw IoError("report: write to " + path.string() + " failed");
}

double LrSchedule::update(double epoch_loss) {
  if (!std::isnan(previous_) && epoch_loss > previous_) lr_ *= decay_;
  previous_ = epoch_loss;
  return lr_;
}

template <typename T>
GanTrainer<T>::GanTrainer(Generator<T>& g, DiscriminatorBase<T>& d, TrainConfig cfg)
    : g_(g),
      d_(d),
      cfg_((cfg.validate(), cfg)),
      g_opt_(g.params(), static_cast<T>(cfg_.lr)),
      d_opt_(d.params(), static_cast<T>(cfg_.lr)) {}

template <typename T>
void GanTrainer<T>::set_lr(double lr) {
  g_opt_.set_lr(static_cast<T>(lr));
  d_opt_.set_lr(static_cast<T>(lr));
}

template <typename T>
StepLosses GanTrainer<T>::train_step(const Tensor<T>& noisy, const Tensor<T>& clean) {
  if (noisy.rank() != 2 || noisy.shape() != clean.shape()) {
    throw DimensionError("train_step: noisy " + shape_str(noisy.shape()) + " and clean " +
                         shape_str(clean.shape()) + " must both be [B, L]");
  }
  Var<T> x = Var<T>::input(noisy);
  Var<T> y = Var<T>::input(clean);
  Var<T> gx = g_.forward(x, true);

  // Discriminator update against the detached generator output.
  double d_value = 0;
  {
    Var<T> d_real = d_.forward(y, x, true);
    Var<T> d_fake = d_.forward(detach(gx), x, true);
    Var<T> d_loss = adversarial_losses(cfg_.loss, d_real, d_fake).d_loss;
    require_finite(d_loss, "discriminator loss");
    d_opt_.zero_grad();
    backward(d_loss);
    d_opt_.step();
    d_opt_.zero_grad();
    d_value = static_cast<double>(d_loss.value()[0]);
  }

  // Generator update with D frozen (no power iteration, no parameter grads).
  const auto d_params = d_.params();
  set_requires_grad(d_params, false);
  StepLosses out;
  try {
    Var<T> d_real;
    {
      NoGradGuard guard;
      d_real = d_.forward(y, x, false);
    }
    Var<T> d_fake = d_.forward(gx, x, false);
    Var<T> adv = adversarial_losses(cfg_.loss, d_real, d_fake).g_loss;
    require_finite(adv, "generator adversarial loss");
    Var<T> l1 = ops::l1_mean(gx, y);
    require_finite(l1, "L1 loss");
    Var<T> total = ops::add(adv, ops::scale(l1, static_cast<T>(cfg_.lambda_l1)));
    require_finite(total, "generator total loss");
    g_opt_.zero_grad();
    backward(total);
    g_opt_.step();
    g_opt_.zero_grad();
    out.g_total = static_cast<double>(total.value()[0]);
    out.g_adv = static_cast<double>(adv.value()[0]);
    out.l1 = static_cast<double>(l1.value()[0]);
  } catch (...) {
    set_requires_grad(d_params, true);
    throw;
  }
  set_requires_grad(d_params, true);
  out.d_loss = d_value;
  return out;
}

template <typename T>
SliceSet<T> SliceSet<T>::from_utterances(const std::vector<Utterance>& utts) {
  SliceSet<T> set;
  for (const auto& u : utts) {
    std::vector<T> n(u.noisy.begin(), u.noisy.end()), c(u.clean.begin(), u.clean.end());
    auto sn = slice_utterance<T>(n);
    auto sc = slice_utterance<T>(c);
    for (std::size_t i = 0; i < sn.slices.size(); ++i) {
      set.noisy.push_back(std::move(sn.slices[i]));
      set.clean.push_back(std::move(sc.slices[i]));
    }
  }
  return set;
}

DataSplit split_validation(std::vector<Utterance> utts, double fraction, std::uint64_t seed) {
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(utts.size())));
  std::vector<std::size_t> order(utts.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> held(utts.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) held[order[i]] = true;
  DataSplit split;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    (held[i] ? split.validation : split.train).push_back(std::move(utts[i]));
  }
  return split;
}

template <typename T>
std::vector<T> enhance_utterance(Generator<T>& g, std::span<const T> noisy, std::size_t batch) {
  if (batch == 0) throw ContractError("enhance_utterance: batch must be positive");
  NoGradGuard guard;
  auto sliced = slice_utterance(noisy);
  const std::size_t n = sliced.slices.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::vector<T>> out(n);
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    Var<T> y = g.forward(Var<T>::input(stack_rows(sliced.slices, idx, b, e)), false);
    for (std::size_t i = b; i < e; ++i) {
      const T* p = y.value().ptr() + (i - b) * kSliceLen;
      out[i].assign(p, p + kSliceLen);
    }
  }
  return reconstruct_utterance(out, noisy.size());
}

template <typename T>
double validation_si_sdr(Generator<T>& g, const std::vector<Utterance>& val) {
  if (val.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  for (const auto& u : val) {
    std::vector<T> noisy(u.noisy.begin(), u.noisy.end()), clean(u.clean.begin(), u.clean.end());
    auto est = enhance_utterance<T>(g, noisy);
    total += si_sdr<T>(est, clean);
  }
  return total / static_cast<double>(val.size());
}

template <typename T>
TrainReport train_loop(GanTrainer<T>& trainer, const SliceSet<T>& data,
                       const std::vector<Utterance>& validation, const TrainLoopOptions& options) {
  if (data.size() == 0) throw ContractError("train_loop: dataset is empty");
  const TrainConfig& cfg = trainer.config();
  LrSchedule schedule(cfg.lr, cfg.lr_decay);
  trainer.set_lr(cfg.lr);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  TrainReport report;
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double g_sum = 0, d_sum = 0, l1_sum = 0;
    std::size_t steps = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      StepLosses s = trainer.train_step(stack_rows(data.noisy, order, b, e),
                                        stack_rows(data.clean, order, b, e));
      g_sum += s.g_total;
      d_sum += s.d_loss;
      l1_sum += s.l1;
      ++steps;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.g_loss = g_sum / static_cast<double>(steps);
    rec.d_loss = d_sum / static_cast<double>(steps);
    rec.l1 = l1_sum / static_cast<double>(steps);
    rec.val_si_sdr = validation_si_sdr(trainer.generator(), validation);
    rec.lr = schedule.lr();
    report.epochs.push_back(rec);
    trainer.set_lr(schedule.update(rec.g_loss));
    if (options.out_dir) {
      report.write(*options.out_dir / "report.tsv");
      make_checkpoint(trainer, epoch, schedule).write(*options.out_dir / "checkpoint.dcrg");
    }
    if (options.on_epoch) options.on_epoch(rec);
  }
  return report;
}

template <typename T>
Checkpoint make_checkpoint(GanTrainer<T>& trainer, std::size_t epoch, const LrSchedule& schedule) {
  Checkpoint ck;
  Generator<T>& g = trainer.generator();
  const GeneratorConfig& gc = g.config();
  ck.put("meta.precision", Tensor<T>::scalar(std::is_same_v<T, float> ? T(0) : T(1)));
  ck.put("meta.g.channels", vector_tensor<T>({gc.encoder_channels.begin(), gc.encoder_channels.end()}));
  ck.put("meta.g.recurrent",
         vector_tensor<T>({double(static_cast<int>(gc.recurrent_kind)), double(gc.recurrent_layers),
                           double(gc.recurrent_units), double(static_cast<int>(gc.lstm_sign))}));
  ck.put("meta.g.mask", vector_tensor<T>({double(static_cast<int>(gc.mask_mode))}));
  ck.put("meta.g.batch_norm", vector_tensor<T>({double(static_cast<int>(gc.batch_norm))}));
  ck.put("meta.g.stft",
         vector_tensor<T>({double(gc.stft.win_len), double(gc.stft.hop), double(gc.stft.fft_len)}));
  if (auto* d = dynamic_cast<Discriminator<T>*>(&trainer.discriminator())) {
    const DiscriminatorConfig& dc = d->config();
    ck.put("meta.d.channels", vector_tensor<T>({dc.channels.begin(), dc.channels.end()}));
    ck.put("meta.d.geometry", vector_tensor<T>({double(dc.filter_len), double(dc.stride),
                                                dc.leaky_slope, double(dc.input_len)}));
  }
  put_params(ck, "g.", g.params());
  put_buffers(ck, "g.", g.buffers());
  put_params(ck, "d.", trainer.discriminator().params());
  put_buffers(ck, "d.", trainer.discriminator().buffers());
  put_optimizer(ck, "opt.g.", trainer.g_optimizer());
  put_optimizer(ck, "opt.d.", trainer.d_optimizer());
  ck.put("train.epoch", Tensor<T>::scalar(static_cast<T>(epoch)));
  ck.put("train.lr", Tensor<T>::scalar(static_cast<T>(schedule.lr())));
  ck.put("train.previous_loss", Tensor<T>::scalar(static_cast<T>(schedule.previous())));
  return ck;
}

Precision checkpoint_precision(const Checkpoint& ck) {
  return ck.get<double>("meta.precision")[0] == 0 ? Precision::f32 : Precision::f64;
}

GeneratorConfig generator_config_from(const Checkpoint& ck) {
  GeneratorConfig cfg;
  cfg.encoder_channels.clear();
  for (double c : read_vector(ck, "meta.g.channels")) cfg.encoder_channels.push_back(as_size(c));
  const auto rec = read_vector(ck, "meta.g.recurrent");
  const auto stft = read_vector(ck, "meta.g.stft");
  if (rec.size() != 4 || stft.size() != 3) throw IoError("checkpoint: malformed generator metadata");
  cfg.recurrent_kind = static_cast<RecurrentKind>(as_size(rec[0]));
  cfg.recurrent_layers = as_size(rec[1]);
  cfg.recurrent_units = as_size(rec[2]);
  cfg.lstm_sign = static_cast<ComplexLstmSign>(as_size(rec[3]));
  cfg.mask_mode = static_cast<MaskMode>(as_size(read_vector(ck, "meta.g.mask").at(0)));
  cfg.batch_norm = static_cast<BatchNormMode>(as_size(read_vector(ck, "meta.g.batch_norm").at(0)));
  cfg.stft = StftConfig::make(as_size(stft[0]), as_size(stft[1]), as_size(stft[2]));
  cfg.validate();
  return cfg;
}

DiscriminatorConfig discriminator_config_from(const Checkpoint& ck) {
  DiscriminatorConfig cfg;
  cfg.channels.clear();
  for (double c : read_vector(ck, "meta.d.channels")) cfg.channels.push_back(as_size(c));
  const auto geo = read_vector(ck, "meta.d.geometry");
  if (geo.size() != 4) throw IoError("checkpoint: malformed discriminator metadata");
  cfg.filter_len = as_size(geo[0]);
  cfg.stride = as_size(geo[1]);
  cfg.leaky_slope = geo[2];
  cfg.input_len = as_size(geo[3]);
  cfg.validate();
  return cfg;
}

template <typename T>
void load_generator(const Checkpoint& ck, Generator<T>& g) {
  for (auto& p : g.params()) {
    Var<T> v = p.var;
    v.mutable_value() = get_shaped<T>(ck, "g." + p.name, v.shape());
  }
  for (auto& b : g.buffers()) *b.tensor = get_shaped<T>(ck, "g." + b.name, b.tensor->shape());
}

template <typename T>
std::unique_ptr<Generator<T>> generator_from_checkpoint(const Checkpoint& ck) {
  auto g = std::make_unique<Generator<T>>(generator_config_from(ck), 0);
  load_generator(ck, *g);
  return g;
}

#define DCCRGAN_INSTANTIATE(T)                                                                  \
  template class GanTrainer<T>;                                                                 \
  template struct SliceSet<T>;                                                                  \
  template std::vector<T> enhance_utterance(Generator<T>&, std::span<const T>, std::size_t);    \
  template double validation_si_sdr(Generator<T>&, const std::vector<Utterance>&);              \
  template TrainReport train_loop(GanTrainer<T>&, const SliceSet<T>&,                           \
                                  const std::vector<Utterance>&, const TrainLoopOptions&);      \
  template Checkpoint make_checkpoint(GanTrainer<T>&, std::size_t, const LrSchedule&);          \
  template void load_generator(const Checkpoint&, Generator<T>&);                               \
  template std::unique_ptr<Generator<T>> generator_from_checkpoint(const Checkpoint&);

DCCRGAN_INSTANTIATE(float)
DCCRGAN_INSTANTIATE(double)
#undef DCCRGAN_INSTANTIATE

}  // namespace dccrgan

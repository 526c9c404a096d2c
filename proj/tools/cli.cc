// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "dccrgan/data.h"
#include "dccrgan/error.h"
#include "dccrgan/metrics.h"
#include "dccrgan/trainer.h"
#include "dccrgan/verify.h"
#include "dccrgan/wav.h"

namespace dccrgan::cli {

namespace fs = std::filesystem;

namespace {

struct SynthOptions {
  std::string out;
  std::size_t n_train = 200;
  std::size_t n_test = 40;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  std::string manifest;
  std::string out;
  std::string mask = "crm";
  std::string recurrent = "cblstm";
  std::string loss = "r";
  std::size_t epochs = 100;
  std::size_t batch = 0;  // 0: 8 for toy, 64 for paper
  double lr = 1e-3;
  double lambda_l1 = 100.0;
  std::uint64_t seed = 0;
  std::string scale = "paper";
  std::string precision = "f32";
  double val_fraction = 0.1;
};

struct EnhanceOptions {
  std::string checkpoint;
  std::string in;
  std::string out;
};

struct EvaluateOptions {
  std::string manifest;
  std::string checkpoint;
  std::string report;
};

using Resolved = std::vector<std::pair<std::string, std::string>>;

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void print_resolved(const std::string& command, const Resolved& kv) {
  std::cerr << "# resolved config: " << command << "\n";
  for (const auto& [k, v] : kv) std::cerr << k << " = " << v << "\n";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Appends "--key value" for every config entry not given on the command line.
void merge_config_file(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  std::vector<std::string> extra;
  for (const auto& [k, v] : parse_config_text(text.str())) {
    if (k == "config") throw ConfigError("config file may not name another config file");
    if (has_flag(args, k)) continue;
    extra.push_back("--" + k);
    extra.push_back(v);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

int report_checks(const std::vector<CheckResult>& results) {
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cerr << format_check(r) << "\n";
    if (!r.passed) ++failed;
  }
  std::cerr << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

GeneratorConfig generator_config(const TrainOptions& o) {
  GeneratorConfig g = o.scale == "toy" ? GeneratorConfig::toy() : GeneratorConfig::paper();
  g.mask_mode = parse_mask_mode(o.mask);
  g.recurrent_kind = parse_recurrent_kind(o.recurrent);
  return g;
}

template <typename T>
int train_typed(const TrainOptions& o, const TrainConfig& tc) {
  const GeneratorConfig gc = generator_config(o);
  const DiscriminatorConfig dc =
      o.scale == "toy" ? DiscriminatorConfig::toy() : DiscriminatorConfig::paper();
  gc.validate();
  dc.validate();

  auto utts = load_manifest(o.manifest);
  DataSplit split = split_validation(std::move(utts), tc.val_fraction, tc.seed);
  const auto data = SliceSet<T>::from_utterances(split.train);
  std::cerr << "training on " << split.train.size() << " utterances (" << data.size()
            << " slices), validating on " << split.validation.size() << "\n";

  Generator<T> g(gc, tc.seed);
  Discriminator<T> d(dc, tc.seed + 1);
  std::cerr << "generator parameters: " << count_parameters(g.params())
            << ", discriminator parameters: " << count_parameters(d.params()) << "\n";
  GanTrainer<T> trainer(g, d, tc);
  TrainLoopOptions lo;
  lo.out_dir = fs::path(o.out);
  const auto start = std::chrono::steady_clock::now();
  lo.on_epoch = [&](const EpochRecord& r) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "epoch %zu/%zu  g %.4f  d %.4f  l1 %.5f  val_si_sdr %.2f dB  lr %.2e  (%.0f s)",
                  r.epoch, tc.epochs, r.g_loss, r.d_loss, r.l1, r.val_si_sdr, r.lr, secs);
    std::cerr << line << std::endl;
  };
  train_loop(trainer, data, split.validation, lo);
  std::cerr << "wrote " << (fs::path(o.out) / "checkpoint.dcrg").string() << " and "
            << (fs::path(o.out) / "report.tsv").string() << "\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& o) {
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch != 0 ? o.batch : (o.scale == "toy" ? 8 : 64);
  tc.lr = o.lr;
  tc.lambda_l1 = o.lambda_l1;
  tc.loss = parse_loss_kind(o.loss);
  tc.seed = o.seed;
  tc.val_fraction = o.val_fraction;
  tc.validate();
  print_resolved("train", {{"manifest", o.manifest},
                           {"out", o.out},
                           {"mask", o.mask},
                           {"recurrent", o.recurrent},
                           {"loss", o.loss},
                           {"epochs", std::to_string(tc.epochs)},
                           {"batch", std::to_string(tc.batch_size)},
                           {"lr", fmt_double(tc.lr)},
                           {"lambda-l1", fmt_double(tc.lambda_l1)},
                           {"seed", std::to_string(tc.seed)},
                           {"scale", o.scale},
                           {"precision", o.precision},
                           {"val-fraction", fmt_double(tc.val_fraction)}});
  return o.precision == "f64" ? train_typed<double>(o, tc) : train_typed<float>(o, tc);
}

using Enhancer = std::function<std::vector<float>(const std::vector<float>&)>;

template <typename T>
Enhancer make_enhancer_typed(const Checkpoint& ck) {
  std::shared_ptr<Generator<T>> g = generator_from_checkpoint<T>(ck);
  return [g](const std::vector<float>& noisy) {
    const std::vector<T> x(noisy.begin(), noisy.end());
    const std::vector<T> y = enhance_utterance<T>(*g, x);
    return std::vector<float>(y.begin(), y.end());
  };
}

Enhancer make_enhancer(const Checkpoint& ck) {
  return checkpoint_precision(ck) == Precision::f64 ? make_enhancer_typed<double>(ck)
                                                    : make_enhancer_typed<float>(ck);
}

int cmd_enhance(const EnhanceOptions& o) {
  print_resolved("enhance", {{"checkpoint", o.checkpoint}, {"in", o.in}, {"out", o.out}});
  const Checkpoint ck = Checkpoint::read(o.checkpoint);
  const WavData in = read_wav(o.in);
  const auto out = make_enhancer(ck)(in.samples);
  write_wav(o.out, out);
  std::cerr << "enhanced " << out.size() << " samples\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o) {
  print_resolved("evaluate",
                 {{"manifest", o.manifest}, {"checkpoint", o.checkpoint}, {"report", o.report}});
  const Checkpoint ck = Checkpoint::read(o.checkpoint);
  const auto utts = load_manifest(o.manifest);
  if (utts.empty()) throw ConfigError("evaluate: manifest '" + o.manifest + "' is empty");
  const Enhancer enhance = make_enhancer(ck);
  static const char* kMetrics[] = {"si_sdr", "seg_snr", "lsd"};
  std::vector<MetricRow> rows;
  std::map<double, std::map<std::string, std::pair<double, std::size_t>>> by_snr;
  std::map<std::string, std::pair<double, std::size_t>> overall;
  auto add = [&](const std::string& id, double snr, const std::string& metric, double v) {
    rows.push_back({id, metric, v});
    auto& s = by_snr[snr][metric];
    s.first += v;
    ++s.second;
    auto& a = overall[metric];
    a.first += v;
    ++a.second;
  };
  for (const auto& u : utts) {
    const auto enhanced = enhance(u.noisy);
    const std::span<const float> ref(u.clean);
    const std::vector<std::span<const float>> candidates{enhanced, u.noisy};
    for (std::size_t c = 0; c < 2; ++c) {
      const std::string prefix = c == 0 ? "" : "noisy_";
      const double vals[] = {si_sdr<float>(candidates[c], ref), seg_snr<float>(candidates[c], ref),
                             log_spectral_distance<float>(candidates[c], ref)};
      for (std::size_t m = 0; m < 3; ++m) add(u.id, u.snr_db, prefix + kMetrics[m], vals[m]);
    }
  }
  auto append_means = [&rows](const std::string& id,
                              const std::map<std::string, std::pair<double, std::size_t>>& acc) {
    for (const auto& [metric, s] : acc) rows.push_back({id, metric, s.first / double(s.second)});
  };
  for (const auto& [snr, acc] : by_snr) {
    std::ostringstream id;
    id << "mean_snr_" << snr;
    append_means(id.str(), acc);
  }
  append_means("mean", overall);
  write_metric_report(o.report, rows);

  auto mean_of = [&](const std::string& m) { return overall[m].first / double(overall[m].second); };
  char line[256];
  std::snprintf(line, sizeof line,
                "%zu utterances  si_sdr %.2f dB (noisy %.2f, gain %+.2f)  seg_snr %.2f dB (noisy "
                "%.2f)  lsd %.2f dB (noisy %.2f)",
                utts.size(), mean_of("si_sdr"), mean_of("noisy_si_sdr"),
                mean_of("si_sdr") - mean_of("noisy_si_sdr"), mean_of("seg_snr"),
                mean_of("noisy_seg_snr"), mean_of("lsd"), mean_of("noisy_lsd"));
  std::cerr << line << "\n";
  return kExitOk;
}

int cmd_synth(const SynthOptions& o) {
  print_resolved("synth-data", {{"out", o.out},
                                {"n-train", std::to_string(o.n_train)},
                                {"n-test", std::to_string(o.n_test)},
                                {"seed", std::to_string(o.seed)}});
  CorpusSpec spec;
  spec.n_train = o.n_train;
  spec.n_test = o.n_test;
  spec.seed = o.seed;
  spec.validate();
  const Corpus corpus = generate_corpus(spec);
  write_corpus(corpus, o.out);
  std::cerr << "wrote " << corpus.train.size() << " train and " << corpus.test.size()
            << " test utterances to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Complex-valued GAN speech enhancement", "dccrgan"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  const std::vector<std::string> masks{"crm", "polar", "real"};
  const std::vector<std::string> kinds{"lstm", "clstm", "cblstm"};
  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat 'key = value' file; flags override it");
  };

  SynthOptions synth;
  auto* s = app.add_subcommand("synth-data", "Generate the synthetic train/test corpus");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--n-train", synth.n_train, "training utterances")->capture_default_str();
  s->add_option("--n-test", synth.n_test, "test utterances")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  add_config(s);

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a generator/discriminator pair");
  t->add_option("--manifest", train.manifest, "training manifest")->required();
  t->add_option("--out", train.out, "directory for checkpoint.dcrg and report.tsv")->required();
  t->add_option("--mask", train.mask)->check(CLI::IsMember(masks))->capture_default_str();
  t->add_option("--recurrent", train.recurrent)->check(CLI::IsMember(kinds))->capture_default_str();
  t->add_option("--loss", train.loss)->check(CLI::IsMember({"r", "ra"}))->capture_default_str();
  t->add_option("--epochs", train.epochs)->capture_default_str();
  t->add_option("--batch", train.batch, "slices per step (default 8 toy, 64 paper)");
  t->add_option("--lr", train.lr)->capture_default_str();
  t->add_option("--lambda-l1", train.lambda_l1)->capture_default_str();
  t->add_option("--seed", train.seed)->capture_default_str();
  t->add_option("--scale", train.scale)->check(CLI::IsMember({"paper", "toy"}))->capture_default_str();
  t->add_option("--precision", train.precision)
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  t->add_option("--val-fraction", train.val_fraction, "held-out share of training utterances")
      ->capture_default_str();
  add_config(t);

  EnhanceOptions enh;
  auto* e = app.add_subcommand("enhance", "Enhance one WAV file");
  e->add_option("--checkpoint", enh.checkpoint)->required();
  e->add_option("--in", enh.in)->required();
  e->add_option("--out", enh.out)->required();
  add_config(e);

  EvaluateOptions ev;
  auto* v = app.add_subcommand("evaluate", "Score a checkpoint on a manifest");
  v->add_option("--manifest", ev.manifest)->required();
  v->add_option("--checkpoint", ev.checkpoint)->required();
  v->add_option("--report", ev.report)->required();
  add_config(v);

  std::string module;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gc->add_option("--module", module)->check(CLI::IsMember(gradcheck_modules()));
  add_config(gc);

  auto* st = app.add_subcommand("selftest", "Oracle and round-trip checks");
  add_config(st);

  try {
    merge_config_file(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_enhance(enh);
    if (v->parsed()) return cmd_evaluate(ev);
    if (gc->parsed()) {
      print_resolved("gradcheck", {{"module", module.empty() ? "all" : module}});
      return report_checks(run_gradcheck_suite(module));
    }
    if (st->parsed()) {
      print_resolved("selftest", {});
      return report_checks(run_selftest());
    }
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dccrgan::cli

// Command-line front end: data generation, training, evaluation, sampling.
//
// Exit status: 0 success, 1 check failed, 2 usage or configuration error,
// 3 non-finite values during training, 4 malformed input file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bandit/checkpoint.hpp"
#include "bandit/config.hpp"
#include "bandit/errors.hpp"
#include "bandit/experiment.hpp"
#include "bandit/gradcheck.hpp"
#include "bandit/rng.hpp"

namespace fs = std::filesystem;
using namespace bandit;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3, kFormat = 4 };

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, std::string out_help) {
  cmd->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "base seed");
  cmd->add_option("--out", c.out, std::move(out_help));
  cmd->add_option("--set", c.overrides, "extra key=value setting (repeatable)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed_set) cfg.seed = c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const char* fallback) {
  fs::path p = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  fs::create_directories(p);
  return p;
}

void write_rows(const fs::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + path.string());
  write_metrics_header(csv);
  for (const auto& r : rows) write_metric_row(csv, r);
}

const Corpus& corpus_of(const PreparedData& d, const std::string& name) {
  if (name == "a-train") return d.a_train;
  if (name == "a-valid") return d.a_valid;
  if (name == "a-test") return d.a_test;
  if (name == "b-train") return d.b_train;
  if (name == "b-valid") return d.b_valid;
  if (name == "b-test") return d.b_test;
  throw ConfigError("unknown split '" + name + "'");
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) s += (i ? " " : "") + words[i];
  return s;
}

int gen_data_cmd(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  SyntheticTaskSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  const SyntheticData data = gen_data(spec);
  const fs::path dir = out_dir(c, "data");
  write_synthetic(data, dir);
  std::ofstream lex(dir / "lexicon.txt", std::ios::binary);
  for (std::size_t i = 0; i < data.source_words.size(); ++i)
    lex << data.source_words[i] << '\t' << data.lexicon_a[i] << '\t' << data.lexicon_b[i] << '\n';
  for (const Corpus* corpus : data.corpora())
    std::printf("%s.%s %zu\n", corpus->domain.c_str(), corpus->split.c_str(), corpus->size());
  return kOk;
}

int build_vocab_cmd(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const PreparedData data = prepare_data(cfg);
  const fs::path path = c.out.empty() ? fs::path("vocab.txt") : fs::path(c.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& t : data.vocab.tokens()) out << t << '\n';
  std::printf("%zu tokens -> %s\n", data.vocab.size(), path.string().c_str());
  return kOk;
}

int train_mle_cmd(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const PreparedData data = prepare_data(cfg);
  const fs::path dir = out_dir(c, "mle");
  TrainResult r = pretrain(cfg, data);
  write_rows(dir / "metrics.csv", r.metrics);
  save_checkpoint(dir / "mle.ckpt", {data.vocab, r.best_params, std::nullopt,
                                     {r.best_iteration, cfg.seed, cfg.hash()}});
  const TestScores s = test_scores(r.best_params, data, cfg.max_len);
  std::printf("best update %zu valid ggleu %.4f\n", r.best_iteration, r.best_score);
  std::printf("test_a ggleu %.4f bleu %.4f\ntest_b ggleu %.4f bleu %.4f\n", s.a.ggleu, s.a.bleu,
              s.b.ggleu, s.b.bleu);
  return kOk;
}

struct BanditFlags {
  std::string objective, cv, pair_feedback, init;
  std::optional<std::size_t> iters;
  std::optional<double> alpha;
};

int train_bandit_cmd(const Common& c, const BanditFlags& f) {
  ExperimentConfig cfg = resolve(c);
  if (!f.objective.empty()) cfg.bandit.objective = parse_objective(f.objective);
  if (!f.cv.empty()) cfg.bandit.cv_mode = parse_cv_mode(f.cv);
  if (!f.pair_feedback.empty()) cfg.bandit.pair_feedback = parse_pair_feedback(f.pair_feedback);
  if (f.iters) cfg.bandit.iterations = *f.iters;
  if (f.alpha) cfg.bandit.adam.alpha = *f.alpha;
  if (!f.init.empty()) cfg.init_checkpoint = f.init;
  if (cfg.bandit.objective == Objective::Mle)
    throw ConfigError("train-bandit needs objective el or pr");
  if (cfg.init_checkpoint.empty())
    throw ConfigError("train-bandit needs a seed model (--init or init_checkpoint)");

  const PreparedData data = prepare_data(cfg);
  Checkpoint seed_ck = load_checkpoint(cfg.init_checkpoint);
  if (!(seed_ck.vocab == data.vocab))
    throw ConfigError("checkpoint vocabulary does not match the corpus vocabulary");

  TrainingConfig bandit = cfg.bandit;
  bandit.seed = bandit_run_seed(cfg, 0);
  bandit.run = "run0";
  const fs::path dir = out_dir(c, "bandit");
  const AdaptOutcome o = adapt(bandit, data, seed_ck.params, cfg.max_len);
  write_rows(dir / "metrics.csv", o.train.metrics);
  save_checkpoint(dir / "bandit.ckpt", {data.vocab, o.train.best_params, o.train.optimizer,
                                        {o.train.best_iteration, bandit.seed, cfg.hash()}});
  const TestScores before = test_scores(seed_ck.params, data, cfg.max_len);
  const TestScores after = test_scores(o.train.best_params, data, cfg.max_len);
  std::printf("updates %zu feedback queries %zu best update %zu\n", o.train.updates,
              o.oracle_calls, o.train.best_iteration);
  std::printf("test_a ggleu %.4f -> %.4f\ntest_b ggleu %.4f -> %.4f\n", before.a.ggleu,
              after.a.ggleu, before.b.ggleu, after.b.ggleu);
  return kOk;
}

int evaluate_cmd(const Common& c, const std::string& checkpoint, const std::string& split,
                 bool replace_unk) {
  const ExperimentConfig cfg = resolve(c);
  const PreparedData data = prepare_data(cfg);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Corpus& corpus = corpus_of(data, split);
  const EncodedCorpus enc = encode_corpus(ck.vocab, corpus);
  const CorpusDecode d = decode_corpus(ck.params, enc, cfg.max_len);
  std::printf("%s ggleu %.6f bleu %.6f\n", split.c_str(), d.scores.ggleu, d.scores.bleu);
  if (!c.out.empty()) {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + c.out);
    for (std::size_t i = 0; i < d.hypotheses.size(); ++i) {
      auto words = ck.vocab.decode(d.hypotheses[i]);
      if (replace_unk) words = unk_replace(words, d.raw[i].attention, corpus.source[i]);
      out << join(words) << '\n';
    }
  }
  return kOk;
}

int sample_cmd(const Common& c, const std::string& checkpoint, const std::string& source,
               std::size_t count, bool pairs) {
  const ExperimentConfig cfg = resolve(c);
  const Checkpoint ck = load_checkpoint(checkpoint);
  std::istringstream in(source);
  Sentence words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) throw ConfigError("--source is empty");
  const auto ids = encode_sentence(ck.vocab, words);
  Rng rng(cfg.seed);
  const Decoded greedy = greedy_decode(ids, ck.params, cfg.max_len);
  std::printf("greedy\t%s\n", join(ck.vocab.decode(greedy.tokens)).c_str());
  for (std::size_t n = 0; n < count; ++n) {
    if (pairs) {
      const SampledPair p = sample_pair(ids, ck.params, cfg.max_len, rng);
      std::printf("pair i=%zu\t%.6f\t%s\t|\t%s\n", p.position, p.log_prob,
                  join(ck.vocab.decode(p.positive)).c_str(),
                  join(ck.vocab.decode(p.perturbed)).c_str());
    } else {
      const SampledSequence s = sample_structure(ids, ck.params, cfg.max_len, rng);
      std::printf("sample\t%.6f\t%s\n", s.log_prob, join(ck.vocab.decode(s.tokens)).c_str());
    }
  }
  return kOk;
}

int grad_check_cmd(const Common& c, std::size_t models, double step, double tolerance) {
  const ExperimentConfig cfg = resolve(c);
  double worst = 0.0;
  std::string where;
  for (std::size_t m = 0; m < models; ++m) {
    const std::uint64_t seed = derive_seed(cfg.seed, m);
    Rng rng(seed);
    const ModelDims dims{kReservedTokens + 3, 4, 4};
    const ModelParams params = ModelParams::random(dims, seed, 0.5);
    auto token = [&] { return static_cast<TokenId>(kReservedTokens + rng.below(3)); };
    std::vector<TokenId> src(1 + rng.below(4)), tgt(1 + rng.below(4));
    for (auto& t : src) t = token();
    for (auto& t : tgt) t = token();
    tgt.push_back(kEndId);
    const auto nll = [&](ModelGraph& mg) {
      const EncoderStates enc = mg.encode(src);
      return mg.graph().neg(mg.sequence_log_prob(enc, tgt));
    };
    const auto r = model_finite_difference_check(nll, params, step, tolerance);
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = "model " + std::to_string(m) + " " + r.worst;
    }
  }
  std::printf("max relative error %.3e at %s (tolerance %.1e)\n", worst, where.c_str(), tolerance);
  return worst < tolerance ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit structured prediction for sequence-to-sequence models"};
  app.require_subcommand(1);

  Common common;
  BanditFlags bandit_flags;
  std::string checkpoint, split = "b-test", source;
  std::size_t count = 5, models = 20;
  bool pairs = false, replace_unk = false;
  double step = 1e-5, tolerance = 1e-4;

  auto* gen = app.add_subcommand("gen-data", "write the synthetic A/B corpora");
  add_common(gen, common, "output directory (default: data)");
  auto* vocab = app.add_subcommand("build-vocab", "build the joint vocabulary");
  add_common(vocab, common, "vocabulary file (default: vocab.txt)");
  auto* mle = app.add_subcommand("train-mle", "pretrain on domain A");
  add_common(mle, common, "output directory (default: mle)");
  auto* bandit = app.add_subcommand("train-bandit", "adapt a seed model on domain B");
  add_common(bandit, common, "output directory (default: bandit)");
  bandit->add_option("--objective", bandit_flags.objective, "el or pr")
      ->check(CLI::IsMember({"el", "pr"}));
  bandit->add_option("--cv", bandit_flags.cv, "none, baseline or sf")
      ->check(CLI::IsMember({"none", "baseline", "sf"}));
  bandit->add_option("--pair-feedback", bandit_flags.pair_feedback, "bin or cont")
      ->check(CLI::IsMember({"bin", "cont"}));
  bandit->add_option("--iters", bandit_flags.iters, "number of updates");
  bandit->add_option("--alpha", bandit_flags.alpha, "Adam step size");
  bandit->add_option("--init", bandit_flags.init, "seed checkpoint")->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("evaluate", "greedy-decode a split and score it");
  add_common(eval, common, "write hypotheses to this file");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "a-train|a-valid|a-test|b-train|b-valid|b-test");
  eval->add_flag("--unk-replace", replace_unk, "replace UNK by the most attended source word");
  auto* samp = app.add_subcommand("sample", "draw structures or pairs for one sentence");
  add_common(samp, common, "unused");
  samp->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  samp->add_option("--source", source, "source sentence, whitespace-tokenized")->required();
  samp->add_option("--count", count, "number of draws");
  samp->add_flag("--pair", pairs, "draw pairs instead of single structures");
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the model gradient");
  add_common(grad, common, "unused");
  grad->add_option("--models", models, "random models to check");
  grad->add_option("--step", step, "central-difference step");
  grad->add_option("--tolerance", tolerance, "maximum relative error");
  auto* run = app.add_subcommand("run", "pretrain, adapt with every run seed, evaluate");
  add_common(run, common, "output directory (default: experiment)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return gen_data_cmd(common);
    if (vocab->parsed()) return build_vocab_cmd(common);
    if (mle->parsed()) return train_mle_cmd(common);
    if (bandit->parsed()) return train_bandit_cmd(common, bandit_flags);
    if (eval->parsed()) return evaluate_cmd(common, checkpoint, split, replace_unk);
    if (samp->parsed()) return sample_cmd(common, checkpoint, source, count, pairs);
    if (grad->parsed()) return grad_check_cmd(common, models, step, tolerance);
    if (run->parsed()) return run_pipeline(resolve(common), out_dir(common, "experiment"));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "aborted: %s\n", e.what());
    return kNumeric;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFormat;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kCheckFailed;
  }
  return kUsage;
}

#include "bandit/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bandit/checkpoint.hpp"
#include "bandit/config.hpp"
#include "bandit/errors.hpp"
#include "bandit/feedback.hpp"
#include "bandit/metrics.hpp"

namespace bandit {

namespace {

// Stage offsets for derive_seed.
constexpr std::uint64_t kDataStage = 100;
constexpr std::uint64_t kInitStage = 200;
constexpr std::uint64_t kMleStage = 300;
constexpr std::uint64_t kBanditStage = 400;

std::vector<std::string> words_of(const Vocabulary& vocab, const std::vector<TokenId>& ids) {
  return vocab.decode(ids);
}

void write_lines(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) out << (i ? " " : "") << l[i];
    out << '\n';
  }
}

}  // namespace

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_text(*this)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EncodedCorpus encode_corpus(const Vocabulary& vocab, const Corpus& corpus) {
  EncodedCorpus e;
  e.source_words = corpus.source;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    e.sources.push_back(encode_sentence(vocab, corpus.source[i]));
    e.references.push_back(encode_sentence(vocab, corpus.target[i]));
    e.targets.push_back(encode_target(vocab, corpus.target[i]));
  }
  return e;
}

CorpusDecode decode_corpus(const ModelParams& params, const EncodedCorpus& corpus,
                           std::size_t max_len) {
  CorpusDecode out;
  out.raw.reserve(corpus.size());
  for (const auto& src : corpus.sources) {
    out.raw.push_back(greedy_decode(src, params, max_len));
    out.hypotheses.push_back(strip_markers(out.raw.back().tokens));
  }
  out.scores.ggleu = corpus_ggleu(out.hypotheses, corpus.references);
  out.scores.bleu = corpus_bleu(out.hypotheses, corpus.references);
  return out;
}

Evaluation evaluate(const ModelParams& params, const EncodedCorpus& corpus, std::size_t max_len) {
  return decode_corpus(params, corpus, max_len).scores;
}

Validator make_validator(const EncodedCorpus& corpus, std::size_t max_len) {
  return [&corpus, max_len](const ModelParams& p) { return evaluate(p, corpus, max_len); };
}

PreparedData prepare_data(const ExperimentConfig& config) {
  PreparedData d;
  if (config.data_dir.empty()) {
    SyntheticTaskSpec spec = config.synthetic;
    spec.seed = derive_seed(config.seed, kDataStage);
    SyntheticData s = gen_data(spec);
    d.a_train = std::move(s.a_train);
    d.a_valid = std::move(s.a_valid);
    d.a_test = std::move(s.a_test);
    d.b_train = std::move(s.b_train);
    d.b_valid = std::move(s.b_valid);
    d.b_test = std::move(s.b_test);
  } else {
    const std::filesystem::path dir = config.data_dir;
    auto load = [&](const char* domain, const char* split) {
      return read_corpus(corpus_path(dir, domain, split, "src"), corpus_path(dir, domain, split, "tgt"),
                         config.max_len, domain, split);
    };
    d.a_train = load("A", "train");
    d.a_valid = load("A", "valid");
    d.a_test = load("A", "test");
    d.b_train = load("B", "train");
    d.b_valid = load("B", "valid");
    d.b_test = load("B", "test");
  }
  for (const Corpus* c : {&d.a_train, &d.a_valid, &d.a_test, &d.b_train, &d.b_valid, &d.b_test})
    c->validate(config.max_len);
  d.vocab = build_vocab({d.a_train.source, d.a_train.target, d.b_train.source}, config.vocab_cutoff);
  d.enc_a_train = encode_corpus(d.vocab, d.a_train);
  d.enc_a_valid = encode_corpus(d.vocab, d.a_valid);
  d.enc_a_test = encode_corpus(d.vocab, d.a_test);
  d.enc_b_train = encode_corpus(d.vocab, d.b_train);
  d.enc_b_valid = encode_corpus(d.vocab, d.b_valid);
  d.enc_b_test = encode_corpus(d.vocab, d.b_test);
  return d;
}

ModelParams initial_model(const ExperimentConfig& config, const Vocabulary& vocab) {
  return ModelParams::random({vocab.size(), config.embedding_size, config.hidden_size},
                             derive_seed(config.seed, kInitStage), config.init_scale);
}

TrainResult pretrain(const ExperimentConfig& config, const PreparedData& data) {
  MleConfig mle = config.mle;
  mle.seed = derive_seed(config.seed, kMleStage);
  std::vector<ParallelExample> examples;
  examples.reserve(data.enc_a_train.size());
  for (std::size_t i = 0; i < data.enc_a_train.size(); ++i)
    examples.push_back({data.enc_a_train.sources[i], data.enc_a_train.targets[i]});
  return mle_train(mle, initial_model(config, data.vocab), examples,
                   make_validator(data.enc_a_valid, config.max_len));
}

std::uint64_t bandit_run_seed(const ExperimentConfig& config, std::size_t run) {
  return derive_seed(config.seed, kBanditStage + run);
}

AdaptOutcome adapt(const TrainingConfig& bandit, const PreparedData& data,
                   const ModelParams& seed_model, std::size_t max_len) {
  FeedbackOracle oracle(data.enc_b_train.references);
  std::vector<BanditExample> stream;
  stream.reserve(data.enc_b_train.size());
  for (std::size_t i = 0; i < data.enc_b_train.size(); ++i)
    stream.push_back({i, data.enc_b_train.sources[i]});
  FeedbackFunctions feedback;
  if (bandit.objective == Objective::Pr)
    feedback.pair = oracle.pair_evaluator(bandit.pair_feedback);
  else
    feedback.sample = oracle.sample_evaluator();
  TrainingConfig cfg = bandit;
  cfg.max_len = max_len;
  AdaptOutcome out;
  out.train = bandit_train_loop(cfg, seed_model, stream, feedback,
                                make_validator(data.enc_b_valid, max_len));
  out.oracle_calls = oracle.calls();
  return out;
}

TestScores test_scores(const ModelParams& params, const PreparedData& data, std::size_t max_len) {
  return {evaluate(params, data.enc_a_test, max_len), evaluate(params, data.enc_b_test, max_len)};
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_decoded(const std::filesystem::path& stem, const ModelParams& params,
                   const PreparedData& data, const EncodedCorpus& corpus, std::size_t max_len) {
  const CorpusDecode dec = decode_corpus(params, corpus, max_len);
  std::vector<std::vector<std::string>> plain, replaced;
  for (std::size_t i = 0; i < dec.hypotheses.size(); ++i) {
    const auto words = words_of(data.vocab, dec.hypotheses[i]);
    plain.push_back(words);
    replaced.push_back(unk_replace(words, dec.raw[i].attention, corpus.source_words[i]));
  }
  write_lines(stem.string() + ".hyp", plain);
  write_lines(stem.string() + ".unk.hyp", replaced);
}

void add_test_rows(std::vector<MetricRow>& rows, const std::string& run, std::size_t iteration,
                   const TestScores& s) {
  rows.push_back({run, iteration, 0, "test_a", "ggleu", s.a.ggleu});
  rows.push_back({run, iteration, 0, "test_a", "bleu", s.a.bleu});
  rows.push_back({run, iteration, 0, "test_b", "ggleu", s.b.ggleu});
  rows.push_back({run, iteration, 0, "test_b", "bleu", s.b.bleu});
}

}  // namespace

int run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const PreparedData data = prepare_data(config);
  if (config.data_dir.empty()) {
    std::filesystem::create_directories(out / "data");
    for (const Corpus* c : {&data.a_train, &data.a_valid, &data.a_test, &data.b_train,
                            &data.b_valid, &data.b_test})
      write_corpus(*c, corpus_path(out / "data", c->domain, c->split, "src"),
                   corpus_path(out / "data", c->domain, c->split, "tgt"));
  }
  {
    std::ofstream v(out / "vocab.txt", std::ios::binary);
    for (const auto& t : data.vocab.tokens()) v << t << '\n';
    std::ofstream c(out / "config.resolved", std::ios::binary);
    c << config_to_text(config);
  }
  const std::uint64_t hash = config.hash();
  std::vector<MetricRow> rows;
  std::ostringstream summary;

  ModelParams seed_model;
  if (config.stage_pretrain && config.init_checkpoint.empty()) {
    TrainResult mle = pretrain(config, data);
    rows.insert(rows.end(), mle.metrics.begin(), mle.metrics.end());
    seed_model = std::move(mle.best_params);
    save_checkpoint(out / "mle.ckpt",
                    {data.vocab, seed_model, std::nullopt, {mle.best_iteration, config.seed, hash}});
  } else if (!config.init_checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(config.init_checkpoint);
    if (!(ck.vocab == data.vocab))
      throw ConfigError("checkpoint vocabulary does not match the corpus vocabulary");
    seed_model = std::move(ck.params);
  } else {
    throw ConfigError("no seed model: enable stage_pretrain or set init_checkpoint");
  }
  const TestScores seed_scores = test_scores(seed_model, data, config.max_len);
  add_test_rows(rows, "seed", 0, seed_scores);
  write_decoded(out / "seed.b_test", seed_model, data, data.enc_b_test, config.max_len);
  summary << "seed test_a ggleu " << fixed(seed_scores.a.ggleu) << " bleu " << fixed(seed_scores.a.bleu)
          << "\nseed test_b ggleu " << fixed(seed_scores.b.ggleu) << " bleu "
          << fixed(seed_scores.b.bleu) << "\n";

  if (config.stage_adapt) {
    std::vector<double> a_ggleu, a_bleu, b_ggleu, b_bleu;
    for (std::size_t r = 0; r < config.runs; ++r) {
      TrainingConfig bandit = config.bandit;
      bandit.seed = bandit_run_seed(config, r);
      bandit.run = "run" + std::to_string(r);
      AdaptOutcome outcome = adapt(bandit, data, seed_model, config.max_len);
      rows.insert(rows.end(), outcome.train.metrics.begin(), outcome.train.metrics.end());
      const TestScores s = test_scores(outcome.train.best_params, data, config.max_len);
      add_test_rows(rows, bandit.run, outcome.train.best_iteration, s);
      a_ggleu.push_back(s.a.ggleu);
      a_bleu.push_back(s.a.bleu);
      b_ggleu.push_back(s.b.ggleu);
      b_bleu.push_back(s.b.bleu);
      save_checkpoint(out / (bandit.run + ".ckpt"),
                      {data.vocab, outcome.train.best_params, outcome.train.optimizer,
                       {outcome.train.best_iteration, bandit.seed, hash}});
      write_decoded(out / (bandit.run + ".b_test"), outcome.train.best_params, data,
                    data.enc_b_test, config.max_len);
    }
    const auto line = [&](const char* name, const std::vector<double>& xs) {
      const MeanStd m = mean_std(xs);
      summary << name << " mean " << fixed(m.mean) << " std " << fixed(m.std) << "\n";
    };
    line("bandit test_a ggleu", a_ggleu);
    line("bandit test_a bleu", a_bleu);
    line("bandit test_b ggleu", b_ggleu);
    line("bandit test_b bleu", b_bleu);
  }

  std::ofstream csv(out / "metrics.csv", std::ios::binary);
  write_metrics_header(csv);
  for (const auto& row : rows) write_metric_row(csv, row);
  std::ofstream(out / "summary.txt", std::ios::binary) << summary.str();
  std::cout << summary.str();
  return 0;
}

}  // namespace bandit

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bandit/corpus.hpp"
#include "bandit/decode.hpp"
#include "bandit/trainer.hpp"

namespace bandit {

struct ExperimentConfig {
  SyntheticTaskSpec synthetic{};
  std::size_t embedding_size = 32;
  std::size_t hidden_size = 64;
  double init_scale = 0.1;
  std::size_t vocab_cutoff = 1;
  std::size_t max_len = 20;
  MleConfig mle{};
  TrainingConfig bandit{};
  std::size_t runs = 2;
  std::uint64_t seed = 1;
  // Empty: corpora are generated from `synthetic`; otherwise read from here.
  std::string data_dir;
  // Empty: the pipeline pretrains; otherwise the seed model is loaded.
  std::string init_checkpoint;
  // Stages run by run_pipeline.
  bool stage_pretrain = true;
  bool stage_adapt = true;

  /// Stable 64-bit hash of the fully resolved configuration.
  std::uint64_t hash() const;
};

struct EncodedCorpus {
  std::vector<std::vector<TokenId>> sources;
  std::vector<std::vector<TokenId>> targets;  // END-terminated
  std::vector<std::vector<TokenId>> references;  // without END
  std::vector<Sentence> source_words;  // for UNK replacement

  std::size_t size() const noexcept { return sources.size(); }
};
EncodedCorpus encode_corpus(const Vocabulary& vocab, const Corpus& corpus);

struct CorpusDecode {
  std::vector<std::vector<TokenId>> hypotheses;  // END stripped
  std::vector<Decoded> raw;
  Evaluation scores;
};
/// Greedy-decodes every source and scores with corpus gGLEU and BLEU.
CorpusDecode decode_corpus(const ModelParams& params, const EncodedCorpus& corpus,
                           std::size_t max_len);
Evaluation evaluate(const ModelParams& params, const EncodedCorpus& corpus, std::size_t max_len);
Validator make_validator(const EncodedCorpus& corpus, std::size_t max_len);

struct PreparedData {
  Corpus a_train, a_valid, a_test, b_train, b_valid, b_test;
  Vocabulary vocab;
  EncodedCorpus enc_a_train, enc_a_valid, enc_a_test, enc_b_train, enc_b_valid, enc_b_test;
};
/// Corpora (generated or read), the joint vocabulary and their encodings.
/// The vocabulary is built from domain A's training data and domain B's
/// training sources.
PreparedData prepare_data(const ExperimentConfig& config);

ModelParams initial_model(const ExperimentConfig& config, const Vocabulary& vocab);
/// MLE on domain A, validated on domain A.
TrainResult pretrain(const ExperimentConfig& config, const PreparedData& data);

/// Seed of bandit run `run` under `config`.
std::uint64_t bandit_run_seed(const ExperimentConfig& config, std::size_t run);

struct AdaptOutcome {
  TrainResult train;
  std::size_t oracle_calls = 0;
};
/// Bandit training on domain B sources; references are reachable only
/// through the feedback oracle. Validated on domain B.
AdaptOutcome adapt(const TrainingConfig& bandit, const PreparedData& data,
                   const ModelParams& seed_model, std::size_t max_len);

struct TestScores {
  Evaluation a;
  Evaluation b;
};
TestScores test_scores(const ModelParams& params, const PreparedData& data, std::size_t max_len);

/// Pretrain on A, adapt on B with `runs` seeds, evaluate the selected
/// iterates on both test sets; writes checkpoints, metrics.csv, decoded
/// outputs and summary.txt into `out`. Returns the process exit status.
int run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out);

}  // namespace bandit

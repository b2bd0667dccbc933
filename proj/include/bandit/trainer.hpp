#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bandit/control_variates.hpp"
#include "bandit/feedback.hpp"
#include "bandit/model.hpp"
#include "bandit/optimizer.hpp"

namespace bandit {

enum class Objective { Mle, El, Pr };
enum class OptimizerKind { Adam, Sgd };

struct TrainingConfig {
  Objective objective = Objective::El;
  PairFeedbackKind pair_feedback = PairFeedbackKind::Binary;
  CvMode cv_mode = CvMode::None;
  bool baseline_includes_current = true;
  std::size_t iterations = 20000;
  std::size_t valid_interval = 1000;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::Adam;
  AdamConfig adam{};
  // SGD fallback: gamma_k = sgd_rate / (1 + sgd_decay * k)
  double sgd_rate = 1e-2;
  double sgd_decay = 0.0;
  std::size_t max_len = 20;
  std::string run = "0";

  void validate() const;
};

/// Source side of one bandit round; the reference stays with the oracle.
struct BanditExample {
  std::size_t id = 0;
  std::vector<TokenId> source;
};

struct ParallelExample {
  std::vector<TokenId> source;
  std::vector<TokenId> target;  // END-terminated
};

struct Evaluation {
  double ggleu = 0.0;
  double bleu = 0.0;
};
using Validator = std::function<Evaluation(const ModelParams&)>;

struct FeedbackFunctions {
  SampleFeedbackFn sample;
  PairFeedbackFn pair;
};

struct MetricRow {
  std::string run;
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

void write_metrics_header(std::ostream& out);
void write_metric_row(std::ostream& out, const MetricRow& row);

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;
  std::size_t best_iteration = 0;
  double best_score = 0.0;
  std::size_t updates = 0;
  std::vector<std::pair<std::size_t, Evaluation>> validation_curve;
  std::vector<MetricRow> metrics;
  OptimizerState optimizer;
};

/// Online learning from bandit feedback: per round, sample (a structure or a
/// pair), query the feedback function, form the score-function gradient,
/// apply the control variate, clip, and step the optimizer. Every
/// `valid_interval` updates the validator scores the current parameters and
/// the best iterate is retained.
TrainResult bandit_train_loop(const TrainingConfig& config, ModelParams initial,
                              const std::vector<BanditExample>& stream,
                              const FeedbackFunctions& feedback, const Validator& validator);

struct MleConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  double clip_norm = 1.0;
  double dropout = 0.0;
  std::size_t valid_interval = 0;  // updates between validations; 0 validates once per epoch
  std::size_t patience = 3;        // validations without improvement before stopping
  double stop_at = 2.0;            // stop once validation gGLEU reaches this value
  std::uint64_t seed = 1;
  std::string run = "mle";
};

/// Minibatch MLE training with periodic validation and early stopping.
TrainResult mle_train(const MleConfig& config, ModelParams initial,
                      const std::vector<ParallelExample>& data, const Validator& validator);

}  // namespace bandit

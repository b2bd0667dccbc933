#include "bandit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "bandit/decode.hpp"
#include "bandit/errors.hpp"
#include "bandit/objectives.hpp"

namespace bandit {

void TrainingConfig::validate() const {
  if (objective == Objective::Mle)
    throw ConfigError("bandit training needs objective el or pr");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (valid_interval == 0) throw ConfigError("valid_interval must be at least 1");
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  if (optimizer == OptimizerKind::Adam && !(adam.alpha > 0.0))
    throw ConfigError("adam_alpha must be positive");
  if (optimizer == OptimizerKind::Sgd && !(sgd_rate > 0.0))
    throw ConfigError("sgd_rate must be positive");
}

void write_metrics_header(std::ostream& out) { out << "run,iteration,epoch,split,metric,value\n"; }

void write_metric_row(std::ostream& out, const MetricRow& row) {
  char value[64];
  std::snprintf(value, sizeof value, "%.17g", row.value);
  out << row.run << ',' << row.iteration << ',' << row.epoch << ',' << row.split << ','
      << row.metric << ',' << value << '\n';
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

struct IntervalStats {
  double feedback = 0.0;
  double grad_norm = 0.0;
  double coefficient = 0.0;
  std::size_t count = 0;
  void reset() { *this = {}; }
  double mean(double v) const { return count ? v / static_cast<double>(count) : 0.0; }
};

class MetricsLog {
 public:
  explicit MetricsLog(std::string run) : run_(std::move(run)) {}
  void add(std::size_t iteration, std::size_t epoch, const char* split, const char* metric,
           double value) {
    rows_.push_back({run_, iteration, epoch, split, metric, value});
  }
  std::vector<MetricRow> take() { return std::move(rows_); }

 private:
  std::string run_;
  std::vector<MetricRow> rows_;
};

}  // namespace

TrainResult bandit_train_loop(const TrainingConfig& config, ModelParams initial,
                              const std::vector<BanditExample>& stream,
                              const FeedbackFunctions& feedback, const Validator& validator) {
  config.validate();
  if (config.iterations > 0 && stream.empty()) throw ContractError("empty bandit data stream");
  if (config.objective == Objective::El && !feedback.sample)
    throw ContractError("EL training needs a sample feedback function");
  if (config.objective == Objective::Pr && !feedback.pair)
    throw ContractError("PR training needs a pair feedback function");

  TrainResult result;
  ModelParams params = std::move(initial);
  OptimizerState optimizer = OptimizerState::for_params(params.tensors(), config.adam);
  ControlVariateState cv(config.cv_mode, config.baseline_includes_current);
  EntrywiseCovariance antithetic;
  Rng sampler(derive_seed(config.seed, 1));
  Rng order_rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order;
  MetricsLog log(config.run);
  IntervalStats stats;

  auto validate = [&](std::size_t iteration, std::size_t epoch) {
    Evaluation e = validator(params);
    result.validation_curve.emplace_back(iteration, e);
    log.add(iteration, epoch, "valid", "ggleu", e.ggleu);
    log.add(iteration, epoch, "valid", "bleu", e.bleu);
    log.add(iteration, epoch, "train", "mean_feedback", stats.mean(stats.feedback));
    log.add(iteration, epoch, "train", "grad_norm", stats.mean(stats.grad_norm));
    log.add(iteration, epoch, "train", "cv_chat_mean", stats.mean(stats.coefficient));
    log.add(iteration, epoch, "train", "antithetic_cov_mean", antithetic.mean_covariance());
    stats.reset();
    if (iteration == 0 || e.ggleu > result.best_score) {
      result.best_score = e.ggleu;
      result.best_iteration = iteration;
      result.best_params = params;
    }
  };

  validate(0, 0);
  const std::size_t n = stream.size();
  for (std::size_t k = 0; k < config.iterations; ++k) {
    if (k % n == 0) order = shuffled(n, order_rng);
    const BanditExample& ex = stream[order[k % n]];

    Graph g;
    ModelGraph model(g, params);
    EncoderStates enc = model.encode(ex.source);
    GradientEstimate estimate;
    GradientMap score;
    double observed = 0.0;
    if (config.objective == Objective::El) {
      SampleTrace trace = sample_structure(model, enc, config.max_len, sampler);
      const double delta = feedback.sample(ex.id, trace.sample.tokens);
      if (!std::isfinite(delta))
        throw NumericError("non-finite feedback at iteration " + std::to_string(k));
      observed = delta;
      score = g.gradients(trace.log_prob, params.tensors());
      estimate = el_gradient(score, delta);
    } else {
      PairTrace trace = sample_pair(model, enc, config.max_len, sampler);
      const double preference = feedback.pair(ex.id, trace.pair);
      if (!std::isfinite(preference))
        throw NumericError("non-finite feedback at iteration " + std::to_string(k));
      observed = preference;
      ScoredPair scored;
      scored.log_prob = trace.pair.log_prob;
      scored.positive = g.gradients(trace.positive_log_prob, params.tensors());
      scored.perturbed = g.gradients(trace.perturbed_log_prob, params.tensors());
      antithetic.observe(scored.positive, scored.perturbed);
      // The pair feedback rewards ranking the p+ member above the perturbed
      // one; the descent step therefore uses its negation as the loss.
      estimate = pr_gradient(scored, -preference);
      score = std::move(scored.positive);
      score.axpy(1.0, scored.perturbed);
    }

    estimate = cv.apply(std::move(estimate), score);
    if (!estimate.gradient.all_finite())
      throw NumericError("non-finite gradient at iteration " + std::to_string(k));
    const double norm = clip_gradient(estimate.gradient, config.clip_norm);
    if (config.optimizer == OptimizerKind::Adam) {
      adam_update(params.tensors(), estimate.gradient, optimizer);
    } else {
      const double rate = config.sgd_rate / (1.0 + config.sgd_decay * static_cast<double>(k));
      sgd_update(params.tensors(), estimate.gradient, rate);
    }
    ++result.updates;
    stats.feedback += observed;
    stats.grad_norm += norm;
    stats.coefficient += cv.last_coefficient_mean();
    ++stats.count;

    const std::size_t done = k + 1;
    if (done % config.valid_interval == 0 || done == config.iterations)
      validate(done, done / n);
  }

  result.final_params = std::move(params);
  result.metrics = log.take();
  result.optimizer = std::move(optimizer);
  return result;
}

TrainResult mle_train(const MleConfig& config, ModelParams initial,
                      const std::vector<ParallelExample>& data, const Validator& validator) {
  if (data.empty()) throw ContractError("mle_train: empty training data");
  if (config.batch_size == 0) throw ConfigError("batch size must be at least 1");
  TrainResult result;
  ModelParams params = std::move(initial);
  OptimizerState optimizer = OptimizerState::for_params(params.tensors(), config.adam);
  Rng order_rng(derive_seed(config.seed, 3));
  Rng dropout_rng(derive_seed(config.seed, 4));
  MetricsLog log(config.run);
  const Dropout dropout{config.dropout, config.dropout > 0.0 ? &dropout_rng : nullptr};

  auto validate = [&](std::size_t iteration, std::size_t epoch, double train_loss) {
    Evaluation e = validator(params);
    result.validation_curve.emplace_back(iteration, e);
    log.add(iteration, epoch, "valid", "ggleu", e.ggleu);
    log.add(iteration, epoch, "valid", "bleu", e.bleu);
    log.add(iteration, epoch, "train", "nll", train_loss);
    if (iteration == 0 || e.ggleu > result.best_score) {
      result.best_score = e.ggleu;
      result.best_iteration = iteration;
      result.best_params = params;
      return true;
    }
    return false;
  };

  validate(0, 0, 0.0);
  std::size_t stale = 0;
  bool stop = false;
  double window_loss = 0.0;
  std::size_t window_count = 0;
  auto checkpoint = [&](std::size_t epoch) {
    const bool improved =
        validate(result.updates, epoch, window_loss / static_cast<double>(window_count));
    window_loss = 0.0;
    window_count = 0;
    stale = improved ? 0 : stale + 1;
    stop = stale >= config.patience || result.best_score >= config.stop_at;
  };
  for (std::size_t epoch = 1; epoch <= config.epochs && !stop; ++epoch) {
    const auto order = shuffled(data.size(), order_rng);
    for (std::size_t start = 0; start < order.size() && !stop; start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      GradientMap batch = params.tensors().zeros_like();
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = data[order[i]];
        MleResult r = mle_loss_and_grad(ex.source, ex.target, params, dropout);
        window_loss += r.loss;
        ++window_count;
        batch.axpy(1.0, r.estimate.gradient);
      }
      batch.scale(1.0 / static_cast<double>(end - start));
      if (!batch.all_finite())
        throw NumericError("non-finite MLE gradient at update " + std::to_string(result.updates));
      clip_gradient(batch, config.clip_norm);
      adam_update(params.tensors(), batch, optimizer);
      ++result.updates;
      if (config.valid_interval > 0 && result.updates % config.valid_interval == 0)
        checkpoint(epoch);
    }
    if (config.valid_interval == 0 && !stop) checkpoint(epoch);
  }
  result.final_params = std::move(params);
  result.metrics = log.take();
  result.optimizer = std::move(optimizer);
  return result;
}

}  // namespace bandit

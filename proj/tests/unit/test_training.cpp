#include <cmath>

#include "bandit/control_variates.hpp"
#include "bandit/enumeration.hpp"
#include "bandit/errors.hpp"
#include "bandit/optimizer.hpp"
#include "bandit/trainer.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bandit;

namespace {

GradientMap flat(std::vector<double> values) {
  GradientMap g;
  g.add("w", Tensor::vector(values));
  return g;
}

GradientMap random_map(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return flat(v);
}

GradientEstimate estimate_of(GradientMap g, double feedback) {
  return GradientEstimate{std::move(g), feedback, Provenance::El};
}

}  // namespace

TEST_CASE("baseline control variate") {
  Rng rng(1);
  const GradientMap score = random_map(rng, 5);
  ControlVariateState first(CvMode::Baseline);
  const GradientEstimate out = first.apply(el_gradient(score, -0.7), score);
  CHECK(testing::max_abs(out.gradient) < 1e-15);
  CHECK(first.average_reward() == -0.7);

  ControlVariateState constant(CvMode::Baseline);
  for (int k = 0; k < 50; ++k) {
    const GradientMap s = random_map(rng, 5);
    CHECK(testing::max_abs(constant.apply(el_gradient(s, -0.25), s).gradient) < 1e-15);
  }

  ControlVariateState lagged(CvMode::Baseline, false);
  const GradientEstimate unchanged = lagged.apply(el_gradient(score, -0.7), score);
  CHECK(unchanged.gradient == el_gradient(score, -0.7).gradient);
  const GradientEstimate second = lagged.apply(el_gradient(score, -0.2), score);
  CHECK(testing::relative_distance(second.gradient, el_gradient(score, 0.5).gradient) < 1e-14);
  CHECK(lagged.last_coefficient_mean() == -0.7);

  ControlVariateState none(CvMode::None);
  CHECK_THROWS_AS(none.average_reward(), ContractError);
}

TEST_CASE("a fixed baseline leaves the expected gradient unchanged") {
  // sum_y p(y) grad log p(y) = 0, so any constant baseline has zero mean.
  const ModelParams p = testing::tiny_model(4, 3, 4, 4, 1.2);
  const std::vector<TokenId> src{2, 1};
  GradientMap mean_score = p.tensors().zeros_like();
  for (const auto& y : enumerate_sequences(3, 3)) {
    const ScoredSample s = score_sample(src, y, p);
    const double prob = std::exp(s.log_prob);
    mean_score.axpy(prob, s.score);
  }
  CHECK(testing::max_abs(mean_score) < 1e-12);
}

TEST_CASE("score-function control variate") {
  Rng rng(2);
  ControlVariateState state(CvMode::ScoreFunction);
  const GradientMap s0 = random_map(rng, 4);
  const GradientEstimate first = state.apply(el_gradient(s0, 0.9), s0);
  CHECK(first.gradient == el_gradient(s0, 0.9).gradient);
  CHECK(state.last_coefficient_mean() == 0.0);

  // feedback fixed at one: the estimate equals the score, so c-hat is one
  ControlVariateState unit(CvMode::ScoreFunction);
  for (int k = 0; k < 40; ++k) {
    const GradientMap s = random_map(rng, 4);
    const GradientEstimate out = unit.apply(el_gradient(s, 1.0), s);
    if (k >= 2) {
      CHECK(unit.last_coefficient_mean() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(testing::max_abs(out.gradient) < 1e-12);
    }
  }
}

TEST_CASE("score-function control variate reduces variance of a correlated estimate") {
  Rng rng(3);
  ControlVariateState state(CvMode::ScoreFunction);
  double raw_sq = 0.0, adjusted_sq = 0.0;
  const int n = 4000;
  for (int k = 0; k < n; ++k) {
    const GradientMap y = random_map(rng, 3);
    GradientMap x = y;
    x.scale(3.0);
    x.axpy(0.1, random_map(rng, 3));
    const GradientEstimate out = state.apply(estimate_of(x, 0.0), y);
    if (k >= 100) {
      raw_sq += x.squared_norm();
      adjusted_sq += out.gradient.squared_norm();
    }
  }
  CHECK(adjusted_sq < 0.01 * raw_sq);
  CHECK(state.last_coefficient_mean() == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("entrywise covariance") {
  EntrywiseCovariance cov;
  cov.observe(flat({1.0, 0.0}), flat({2.0, 5.0}));
  cov.observe(flat({3.0, 0.0}), flat({4.0, 5.0}));
  const GradientMap c = cov.covariance();
  CHECK(c[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c[0][1] == 0.0);
  const GradientMap r = cov.regression_coefficients();
  CHECK(r[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r[0][1] == 0.0);
  CHECK(cov.mean_covariance() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("antithetic identity") {
  Rng rng(4);
  std::vector<double> x1(5000), x2(5000);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    x1[i] = rng.normal();
    x2[i] = -x1[i] + 0.3 * rng.normal();
  }
  const AntitheticSummary s = antithetic_summary(x1, x2);
  CHECK(std::abs(s.estimator_variance - s.identity_variance) < 1e-12);
  CHECK(s.covariance < 0.0);
  CHECK(s.estimator_variance < 0.1);
  CHECK_THROWS_AS(antithetic_summary(std::vector<double>{1.0}, std::vector<double>{1.0}), ContractError);
}

TEST_CASE("gradient clipping") {
  GradientMap g = flat({3.0, 4.0});
  CHECK(clip_gradient(g, 1.0) == 5.0);
  CHECK(g[0][0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g[0][1] == doctest::Approx(0.8).epsilon(1e-15));
  GradientMap h = flat({3.0, 4.0});
  CHECK(clip_gradient(h, 10.0) == 5.0);
  CHECK(h == flat({3.0, 4.0}));
}

TEST_CASE("optimizer steps") {
  ParamSet p = flat({1.0, -2.0, 0.5});
  OptimizerState state = OptimizerState::for_params(p, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  adam_update(p, flat({2.0, -0.5, 0.0}), state);
  CHECK(state.step == 1);
  // first bias-corrected step is alpha * g / (|g| + eps)
  CHECK(p[0][0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p[0][1] == doctest::Approx(-1.9).epsilon(1e-7));
  CHECK(p[0][2] == 0.5);

  ParamSet q = flat({1.0, 1.0});
  sgd_update(q, flat({0.5, -1.0}), 0.2);
  CHECK(q[0][0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(q[0][1] == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("bandit training loop edge cases") {
  const ModelParams initial = testing::tiny_model(5, 6, 3, 4, 0.5);
  const std::vector<BanditExample> stream{{0, {3, 4}}, {1, {5}}};
  const Validator validator = [](const ModelParams&) { return Evaluation{0.5, 0.5}; };
  std::size_t calls = 0;
  FeedbackFunctions zero;
  zero.sample = [&](std::size_t, std::span<const TokenId>) { ++calls; return 0.0; };
  zero.pair = [&](std::size_t, const SampledPair&) { ++calls; return 0.0; };

  TrainingConfig config;
  config.iterations = 0;
  config.valid_interval = 10;
  config.max_len = 5;
  const TrainResult none = bandit_train_loop(config, initial, stream, zero, validator);
  CHECK(none.updates == 0);
  CHECK(none.final_params == initial);
  CHECK(calls == 0);

  for (Objective obj : {Objective::El, Objective::Pr}) {
    config.objective = obj;
    config.iterations = 30;
    calls = 0;
    const TrainResult r = bandit_train_loop(config, initial, stream, zero, validator);
    CHECK(r.updates == 30);
    CHECK(calls == 30);
    CHECK(r.final_params == initial);
  }

  config.objective = Objective::El;
  FeedbackFunctions noisy;
  noisy.sample = [](std::size_t id, std::span<const TokenId> y) {
    return -0.1 * static_cast<double>(y.size() + id);
  };
  const TrainResult a = bandit_train_loop(config, initial, stream, noisy, validator);
  const TrainResult b = bandit_train_loop(config, initial, stream, noisy, validator);
  CHECK(a.final_params == b.final_params);
  CHECK_FALSE(a.final_params == initial);
}

#pragma once

#include <cstddef>
#include <span>

#include "bandit/objectives.hpp"

namespace bandit {

enum class CvMode { None, Baseline, ScoreFunction };

/// Streaming per-entry covariance of two gradient-shaped random variables.
class EntrywiseCovariance {
 public:
  EntrywiseCovariance() = default;
  explicit EntrywiseCovariance(const ParamSet& layout);

  void observe(const GradientMap& x, const GradientMap& y);
  std::size_t count() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  /// Cov(x, y) entrywise (population normalization).
  GradientMap covariance() const;
  /// Cov(x, y) / Var(y) entrywise; entries with Var(y) < min_variance get 0.
  GradientMap regression_coefficients(double min_variance = 1e-12) const;
  double mean_covariance() const;

 private:
  std::size_t n_ = 0;
  GradientMap mean_x_, mean_y_, comoment_, m2_y_;
};

/// Running statistics for the additive control variates.
class ControlVariateState {
 public:
  explicit ControlVariateState(CvMode mode = CvMode::None, bool baseline_includes_current = true);

  CvMode mode() const noexcept { return mode_; }
  std::size_t iterations() const noexcept { return k_; }
  /// Mean of the registered feedback; requires at least one observation.
  double average_reward() const;
  bool baseline_includes_current() const noexcept { return include_current_; }
  /// Mean over entries of the coefficient multiplying the score function in
  /// the most recent adjustment (the baseline value, or mean c-hat).
  double last_coefficient_mean() const noexcept { return last_coefficient_mean_; }
  const EntrywiseCovariance& score_statistics() const noexcept { return score_stats_; }

  /// Dispatches on the configured mode; None returns the estimate unchanged.
  GradientEstimate apply(GradientEstimate estimate, const GradientMap& score);

  /// (delta - mean delta) * score: subtracts the average-reward baseline.
  GradientEstimate apply_baseline(GradientEstimate estimate, const GradientMap& score);
  /// s - c_hat (.) score with c_hat estimated from the previous iterations.
  GradientEstimate apply_score_function(GradientEstimate estimate, const GradientMap& score);

 private:
  CvMode mode_;
  bool include_current_;
  std::size_t k_ = 0;
  double feedback_sum_ = 0.0;
  double last_coefficient_mean_ = 0.0;
  EntrywiseCovariance score_stats_;
};

GradientEstimate apply_baseline_cv(GradientEstimate estimate, ControlVariateState& state,
                                   const GradientMap& score);
GradientEstimate apply_score_function_cv(GradientEstimate estimate, ControlVariateState& state,
                                         const GradientMap& score);

/// Subtracts c (.) score entrywise: the score-function control variate with a
/// fixed coefficient map.
GradientMap subtract_scaled(const GradientMap& estimate, const GradientMap& coefficients,
                            const GradientMap& score);

/// Empirical check of Var((X1 + X2) / 2) against 1/4 (Var X1 + Var X2 + 2 Cov).
struct AntitheticSummary {
  double estimator_variance = 0.0;  // empirical variance of (X1 + X2) / 2
  double identity_variance = 0.0;   // right-hand side from the sample moments
  double covariance = 0.0;
};
AntitheticSummary antithetic_summary(std::span<const double> x1, std::span<const double> x2);

}  // namespace bandit

#include "bandit/control_variates.hpp"

#include "bandit/errors.hpp"

namespace bandit {

EntrywiseCovariance::EntrywiseCovariance(const ParamSet& layout)
    : mean_x_(layout.zeros_like()),
      mean_y_(layout.zeros_like()),
      comoment_(layout.zeros_like()),
      m2_y_(layout.zeros_like()) {}

void EntrywiseCovariance::observe(const GradientMap& x, const GradientMap& y) {
  if (mean_x_.size() == 0) *this = EntrywiseCovariance(x);
  mean_x_.require_same_layout(x, "covariance");
  mean_x_.require_same_layout(y, "covariance");
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double* xs = x[s].data();
    const double* ys = y[s].data();
    double* mx = mean_x_[s].data();
    double* my = mean_y_[s].data();
    double* cxy = comoment_[s].data();
    double* m2 = m2_y_[s].data();
    for (std::size_t i = 0, n = x[s].size(); i < n; ++i) {
      const double dx = xs[i] - mx[i];
      const double dy = ys[i] - my[i];
      mx[i] += dx * inv_n;
      my[i] += dy * inv_n;
      const double dy_after = ys[i] - my[i];
      cxy[i] += dx * dy_after;
      m2[i] += dy * dy_after;
    }
  }
}

GradientMap EntrywiseCovariance::covariance() const {
  GradientMap out = comoment_;
  if (n_ > 0) out.scale(1.0 / static_cast<double>(n_));
  return out;
}

GradientMap EntrywiseCovariance::regression_coefficients(double min_variance) const {
  GradientMap out = comoment_.zeros_like();
  if (n_ == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t s = 0; s < out.size(); ++s)
    for (std::size_t i = 0; i < out[s].size(); ++i) {
      const double var_y = m2_y_[s][i] * inv_n;
      out[s][i] = var_y < min_variance ? 0.0 : comoment_[s][i] / m2_y_[s][i];
    }
  return out;
}

double EntrywiseCovariance::mean_covariance() const {
  if (n_ == 0) return 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& t : comoment_) {
    for (double v : t.values()) sum += v;
    count += t.size();
  }
  return count ? sum / static_cast<double>(count) / static_cast<double>(n_) : 0.0;
}

ControlVariateState::ControlVariateState(CvMode mode, bool baseline_includes_current)
    : mode_(mode), include_current_(baseline_includes_current) {}

double ControlVariateState::average_reward() const {
  if (k_ == 0) throw ContractError("average reward is undefined before the first observation");
  return feedback_sum_ / static_cast<double>(k_);
}

GradientEstimate ControlVariateState::apply(GradientEstimate estimate, const GradientMap& score) {
  switch (mode_) {
    case CvMode::Baseline:
      return apply_baseline(std::move(estimate), score);
    case CvMode::ScoreFunction:
      return apply_score_function(std::move(estimate), score);
    case CvMode::None:
      break;
  }
  last_coefficient_mean_ = 0.0;
  return estimate;
}

GradientEstimate ControlVariateState::apply_baseline(GradientEstimate estimate,
                                                     const GradientMap& score) {
  double baseline = 0.0;
  if (include_current_) {
    ++k_;
    feedback_sum_ += estimate.feedback;
    baseline = average_reward();
  } else {
    if (k_ > 0) baseline = average_reward();
    ++k_;
    feedback_sum_ += estimate.feedback;
  }
  estimate.gradient.axpy(-baseline, score);
  last_coefficient_mean_ = baseline;
  return estimate;
}

GradientEstimate ControlVariateState::apply_score_function(GradientEstimate estimate,
                                                           const GradientMap& score) {
  ++k_;
  feedback_sum_ += estimate.feedback;
  GradientMap original = estimate.gradient;
  if (!score_stats_.empty()) {
    GradientMap c_hat = score_stats_.regression_coefficients();
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : c_hat) {
      for (double v : t.values()) sum += v;
      count += t.size();
    }
    last_coefficient_mean_ = count ? sum / static_cast<double>(count) : 0.0;
    estimate.gradient = subtract_scaled(estimate.gradient, c_hat, score);
  } else {
    last_coefficient_mean_ = 0.0;
  }
  score_stats_.observe(original, score);
  return estimate;
}

GradientEstimate apply_baseline_cv(GradientEstimate estimate, ControlVariateState& state,
                                   const GradientMap& score) {
  return state.apply_baseline(std::move(estimate), score);
}

GradientEstimate apply_score_function_cv(GradientEstimate estimate, ControlVariateState& state,
                                         const GradientMap& score) {
  return state.apply_score_function(std::move(estimate), score);
}

GradientMap subtract_scaled(const GradientMap& estimate, const GradientMap& coefficients,
                            const GradientMap& score) {
  estimate.require_same_layout(coefficients, "control variate");
  estimate.require_same_layout(score, "control variate");
  GradientMap out = estimate;
  for (std::size_t s = 0; s < out.size(); ++s) {
    double* o = out[s].data();
    const double* c = coefficients[s].data();
    const double* y = score[s].data();
    for (std::size_t i = 0, n = out[s].size(); i < n; ++i) o[i] -= c[i] * y[i];
  }
  return out;
}

AntitheticSummary antithetic_summary(std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size() || x1.size() < 2)
    throw ContractError("antithetic_summary: need two equally long samples of size >= 2");
  const double n = static_cast<double>(x1.size());
  double m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    m1 += x1[i];
    m2 += x2[i];
  }
  m1 /= n;
  m2 /= n;
  const double mean_avg = 0.5 * (m1 + m2);
  double v1 = 0, v2 = 0, c = 0, va = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double d1 = x1[i] - m1, d2 = x2[i] - m2;
    const double da = 0.5 * (x1[i] + x2[i]) - mean_avg;
    v1 += d1 * d1;
    v2 += d2 * d2;
    c += d1 * d2;
    va += da * da;
  }
  AntitheticSummary s;
  s.estimator_variance = va / (n - 1.0);
  s.covariance = c / (n - 1.0);
  s.identity_variance = 0.25 * (v1 / (n - 1.0) + v2 / (n - 1.0) + 2.0 * s.covariance);
  return s;
}

}  // namespace bandit

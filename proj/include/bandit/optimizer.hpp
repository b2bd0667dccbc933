#pragma once

#include <cstdint>

#include "bandit/param_set.hpp"

namespace bandit {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  GradientMap first_moment;
  GradientMap second_moment;

  static OptimizerState for_params(const ParamSet& params, AdamConfig config = {});
};

/// Bias-corrected Adam step moving `params` against `gradient`.
void adam_update(ParamSet& params, const GradientMap& gradient, OptimizerState& state);

/// Plain SGD step: params -= rate * gradient.
void sgd_update(ParamSet& params, const GradientMap& gradient, double rate);

/// Rescales `gradient` so its global L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
double clip_gradient(GradientMap& gradient, double max_norm);

}  // namespace bandit

#include "bandit/optimizer.hpp"

#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

OptimizerState OptimizerState::for_params(const ParamSet& params, AdamConfig config) {
  OptimizerState s;
  s.config = config;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  return s;
}

void adam_update(ParamSet& params, const GradientMap& gradient, OptimizerState& state) {
  params.require_same_layout(gradient, "adam_update");
  if (state.first_moment.size() == 0) state = OptimizerState::for_params(params, state.config);
  params.require_same_layout(state.first_moment, "adam_update");
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    double* p = params[s].data();
    const double* g = gradient[s].data();
    double* m = state.first_moment[s].data();
    double* v = state.second_moment[s].data();
    for (std::size_t i = 0, n = params[s].size(); i < n; ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

void sgd_update(ParamSet& params, const GradientMap& gradient, double rate) {
  params.axpy(-rate, gradient);
}

double clip_gradient(GradientMap& gradient, double max_norm) {
  if (!(max_norm > 0.0)) throw ContractError("clip_gradient: max norm must be positive");
  const double norm = gradient.norm();
  if (norm > max_norm) gradient.scale(max_norm / norm);
  return norm;
}

}  // namespace bandit

#include "bandit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

// `run(g)` builds the function on a fresh graph from the current values of
// `params`; entries are perturbed in place.
template <typename Run>
FiniteDifferenceReport check(ParamSet& params, const Run& run, double step, double tolerance) {
  if (!(step > 0.0)) throw ContractError("finite_difference_check: step must be positive");

  GradientMap analytic;
  {
    Graph g;
    Var root = run(g);
    if (!std::isfinite(g.value(root).item()))
      throw NumericError("finite_difference_check: non-finite function value");
    analytic = g.gradients(root, params);
  }

  auto evaluate = [&]() {
    Graph g;
    const double v = g.value(run(g)).item();
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: non-finite evaluation");
    return v;
  };

  FiniteDifferenceReport report;
  for (std::size_t slot = 0; slot < params.size(); ++slot) {
    Tensor& t = params[slot];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double up = evaluate();
      t[i] = saved - step;
      const double down = evaluate();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[slot][i];
      const double rel = relative_error(a, numeric);
      report.entries.push_back({slot, i, a, numeric, rel});
      report.max_absolute_error = std::max(report.max_absolute_error, std::abs(a - numeric));
      if (rel >= report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst = params.name(slot) + "[" + std::to_string(i) + "]";
      }
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace

FiniteDifferenceReport finite_difference_check(const GraphFunction& f, ParamSet params,
                                               double step, double tolerance) {
  return check(params, [&](Graph& g) { return f(g, params); }, step, tolerance);
}

FiniteDifferenceReport model_finite_difference_check(const ModelFunction& f, ModelParams params,
                                                     double step, double tolerance) {
  return check(
      params.tensors(),
      [&](Graph& g) {
        ModelGraph m(g, params);
        return f(m);
      },
      step, tolerance);
}

}  // namespace bandit

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bandit/autodiff.hpp"
#include "bandit/model.hpp"

namespace bandit {

/// Builds a scalar function of the parameters on a fresh graph.
using GraphFunction = std::function<Var(Graph&, const ParamSet&)>;

struct FiniteDifferenceReport {
  struct Entry {
    std::size_t slot;
    std::size_t offset;
    double analytic;
    double numeric;
    double relative_error;
  };
  std::vector<Entry> entries;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::string worst;  // "<param>[<offset>]"
  bool passed = false;
};

/// Relative error used by the check: |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-5);

/// Compares reverse-mode gradients of `f` against central differences
/// (f(x + h) - f(x - h)) / 2h for every parameter entry.
FiniteDifferenceReport finite_difference_check(const GraphFunction& f, ParamSet params,
                                               double step, double tolerance);

using ModelFunction = std::function<Var(ModelGraph&)>;

/// Same check for a scalar built from the model's computations.
FiniteDifferenceReport model_finite_difference_check(const ModelFunction& f, ModelParams params,
                                                     double step, double tolerance);

}  // namespace bandit

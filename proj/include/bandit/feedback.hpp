#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bandit/decode.hpp"
#include "bandit/metrics.hpp"

namespace bandit {

enum class PairFeedbackKind { Binary, Continuous };

/// Pairwise loss from the single-structure losses of the two members:
/// continuous = delta_j - delta_i; binary = 1 if delta_j > delta_i else 0.
double pairwise_feedback(double delta_i, double delta_j, PairFeedbackKind kind);

struct FeedbackRecord {
  std::size_t sample_id = 0;
  double delta = 0.0;
  std::string metric;
  std::size_t iteration = 0;
};

using SampleFeedbackFn = std::function<double(std::size_t sentence, std::span<const TokenId> sample)>;
using PairFeedbackFn = std::function<double(std::size_t sentence, const SampledPair& pair)>;

enum class FeedbackKind { GgleuLoss, PairBinary, PairContinuous };

/// Simulated user holding the references. Learners only ever see the scalar
/// returned by the evaluators it hands out.
class FeedbackOracle {
 public:
  explicit FeedbackOracle(std::vector<std::vector<TokenId>> references,
                          std::size_t max_n = kDefaultMaxOrder);

  /// Delta(y) = -gGLEU(y, reference) with START/END stripped.
  double loss(std::size_t sentence, std::span<const TokenId> sample) const;
  /// Pair feedback on (positive, perturbed) = (y_i, y_j).
  double pair(std::size_t sentence, const SampledPair& pair, PairFeedbackKind kind) const;

  SampleFeedbackFn sample_evaluator() const;
  PairFeedbackFn pair_evaluator(PairFeedbackKind kind) const;

  std::size_t calls() const noexcept { return state_->calls; }
  std::size_t size() const noexcept { return state_->references.size(); }

 private:
  struct State {
    std::vector<std::vector<TokenId>> references;
    std::size_t max_n;
    std::size_t calls = 0;
  };
  const std::vector<TokenId>& reference(std::size_t sentence) const;

  std::shared_ptr<State> state_;
};

}  // namespace bandit

#include "bandit/feedback.hpp"

#include "bandit/errors.hpp"

namespace bandit {

double pairwise_feedback(double delta_i, double delta_j, PairFeedbackKind kind) {
  if (kind == PairFeedbackKind::Continuous) return delta_j - delta_i;
  return delta_j > delta_i ? 1.0 : 0.0;
}

FeedbackOracle::FeedbackOracle(std::vector<std::vector<TokenId>> references, std::size_t max_n)
    : state_(std::make_shared<State>()) {
  for (auto& r : references) {
    auto stripped = strip_markers(r);
    if (stripped.empty()) throw ContractError("feedback oracle: empty reference");
    state_->references.push_back(std::move(stripped));
  }
  state_->max_n = max_n;
}

const std::vector<TokenId>& FeedbackOracle::reference(std::size_t sentence) const {
  if (sentence >= state_->references.size())
    throw IndexError("feedback oracle: unknown sentence id " + std::to_string(sentence));
  return state_->references[sentence];
}

double FeedbackOracle::loss(std::size_t sentence, std::span<const TokenId> sample) const {
  const auto& ref = reference(sentence);
  ++state_->calls;
  return -ggleu(strip_markers(sample), ref, state_->max_n);
}

double FeedbackOracle::pair(std::size_t sentence, const SampledPair& pair,
                            PairFeedbackKind kind) const {
  const auto& ref = reference(sentence);
  ++state_->calls;
  const double delta_i = -ggleu(strip_markers(pair.positive), ref, state_->max_n);
  const double delta_j = -ggleu(strip_markers(pair.perturbed), ref, state_->max_n);
  return pairwise_feedback(delta_i, delta_j, kind);
}

SampleFeedbackFn FeedbackOracle::sample_evaluator() const {
  FeedbackOracle self = *this;
  return [self](std::size_t sentence, std::span<const TokenId> sample) {
    return self.loss(sentence, sample);
  };
}

PairFeedbackFn FeedbackOracle::pair_evaluator(PairFeedbackKind kind) const {
  FeedbackOracle self = *this;
  return [self, kind](std::size_t sentence, const SampledPair& pair) {
    return self.pair(sentence, pair, kind);
  };
}

}  // namespace bandit

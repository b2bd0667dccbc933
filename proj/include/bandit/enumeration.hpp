#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bandit/model.hpp"

namespace bandit {

inline constexpr std::size_t kEnumerationGuard = 1'000'000;

/// Every output structure of length <= max_len: sequences ending in END at
/// their last position (END nowhere else) plus END-free sequences of exactly
/// max_len tokens. These outcomes partition the sampling space.
std::vector<std::vector<TokenId>> enumerate_sequences(std::size_t vocab, std::size_t max_len,
                                                      std::size_t guard = kEnumerationGuard);

/// Greedy conditioning prefix of exactly `steps` tokens (does not stop at END).
std::vector<TokenId> greedy_prefix(std::span<const TokenId> source, const ModelParams& params,
                                   std::size_t steps);

struct ExactRisk {
  double risk = 0.0;
  GradientMap gradient;
};

using SequenceLoss = std::function<double(std::span<const TokenId>)>;
using PairLoss = std::function<double(std::span<const TokenId> positive,
                                      std::span<const TokenId> perturbed)>;

/// E_{p(y|x)}[delta(y)] by exhaustive enumeration, and its autodiff gradient.
ExactRisk exact_risk_and_grad(std::span<const TokenId> source, const ModelParams& params,
                              const SequenceLoss& delta, std::size_t max_len);

/// Expected pair loss under the pair-sampling distribution (uniform position,
/// both members conditioned on the greedy prefix), and its gradient.
ExactRisk exact_pair_risk_and_grad(std::span<const TokenId> source, const ModelParams& params,
                                   const PairLoss& delta, std::size_t max_len);

}  // namespace bandit

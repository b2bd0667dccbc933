#pragma once

#include <span>

#include "bandit/decode.hpp"
#include "bandit/feedback.hpp"
#include "bandit/model.hpp"

namespace bandit {

enum class Provenance { Mle, El, Pr };

/// A stochastic gradient s_k together with the feedback it was scaled by.
struct GradientEstimate {
  GradientMap gradient;
  double feedback = 0.0;
  Provenance provenance = Provenance::El;
};

struct MleResult {
  double loss = 0.0;  // negative log-likelihood of the reference
  GradientEstimate estimate;
};

/// Word-level negative log-likelihood of `reference` and its gradient.
MleResult mle_loss_and_grad(std::span<const TokenId> source, std::span<const TokenId> reference,
                            const ModelParams& params, Dropout dropout = {});

/// Teacher-forced log-probability of a structure and its score function.
struct ScoredSample {
  double log_prob = 0.0;
  GradientMap score;
};
ScoredSample score_sample(std::span<const TokenId> source, std::span<const TokenId> tokens,
                          const ModelParams& params);

/// s = delta * grad log p(sample | x). Verifies that the teacher-forced
/// log-probability reproduces the one recorded while sampling.
GradientEstimate el_gradient(std::span<const TokenId> source, const SampledSequence& sample,
                             double delta, const ModelParams& params);
GradientEstimate el_gradient(const GradientMap& score, double delta);

/// Score functions of the two pair members, both conditioned on the greedy
/// prefix; `perturbed` uses p- at the recorded position.
struct ScoredPair {
  double log_prob = 0.0;
  GradientMap positive;
  GradientMap perturbed;
};
ScoredPair score_pair(std::span<const TokenId> source, const SampledPair& pair,
                      const ModelParams& params);

/// s = delta_pair * (grad log p+(w) + grad log p-(w')).
GradientEstimate pr_gradient(std::span<const TokenId> source, const SampledPair& pair,
                             double delta_pair, const ModelParams& params);
GradientEstimate pr_gradient(const ScoredPair& scores, double delta_pair);

}  // namespace bandit

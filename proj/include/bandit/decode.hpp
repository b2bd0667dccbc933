#pragma once

#include <span>
#include <vector>

#include "bandit/model.hpp"
#include "bandit/rng.hpp"

namespace bandit {

/// A structure drawn token by token from p+ conditioned on its own prefix.
struct SampledSequence {
  std::vector<TokenId> tokens;  // ends with END unless truncated at the length limit
  double log_prob = 0.0;        // sum of per-step log-probabilities
  std::size_t length() const noexcept { return tokens.size(); }
};

/// A pair drawn with every step conditioned on the greedy prefix. `positive`
/// uses p+ throughout; `perturbed` uses p- at step `position` (1-based) only.
struct SampledPair {
  std::vector<TokenId> positive;
  std::vector<TokenId> perturbed;
  std::vector<TokenId> greedy;  // conditioning prefix, one token per decoder step run
  std::size_t position = 1;
  double log_prob = 0.0;  // joint log-probability of both members
};

struct Decoded {
  std::vector<TokenId> tokens;
  std::vector<std::vector<double>> attention;  // one weight vector per emitted token
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Greedy search; stops after END or `max_len` tokens.
Decoded greedy_decode(std::span<const TokenId> source, const ModelParams& params,
                      std::size_t max_len);

SampledSequence sample_structure(std::span<const TokenId> source, const ModelParams& params,
                                 std::size_t max_len, Rng& rng);

/// Both members stop independently at END; the greedy prefix keeps extending
/// until both have stopped or `max_len` steps have run.
SampledPair sample_pair(std::span<const TokenId> source, const ModelParams& params,
                        std::size_t max_len, Rng& rng);

/// Graph-level variants: the sample is drawn on `model`'s graph and the
/// returned handles are the log-probabilities of what was drawn, ready for
/// backward().
struct SampleTrace {
  SampledSequence sample;
  Var log_prob;
};
SampleTrace sample_structure(ModelGraph& model, const EncoderStates& enc, std::size_t max_len,
                             Rng& rng);

struct PairTrace {
  SampledPair pair;
  Var positive_log_prob;   // log p+(w | x, greedy prefix)
  Var perturbed_log_prob;  // log of w' under p+ with p- at the perturbed position
};
PairTrace sample_pair(ModelGraph& model, const EncoderStates& enc, std::size_t max_len, Rng& rng);

/// Recomputes the joint log-probability of a pair from its stored sequences,
/// greedy prefix and perturbation position.
double pair_log_prob(std::span<const TokenId> source, const SampledPair& pair,
                     const ModelParams& params);

}  // namespace bandit

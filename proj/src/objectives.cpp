#include "bandit/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr double kLogProbTolerance = 1e-9;

void require_consistent(double recomputed, double recorded, const char* what) {
  if (!(std::abs(recomputed - recorded) <= kLogProbTolerance)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": recomputed log-probability " << recomputed << " differs from recorded "
        << recorded << "; sample was not drawn from these parameters";
    throw ContractError(msg.str());
  }
}

}  // namespace

MleResult mle_loss_and_grad(std::span<const TokenId> source, std::span<const TokenId> reference,
                            const ModelParams& params, Dropout dropout) {
  if (reference.empty()) throw ContractError("mle: empty reference");
  Graph g;
  ModelGraph m(g, params, dropout);
  EncoderStates enc = m.encode(source);
  Var nll = g.neg(m.sequence_log_prob(enc, reference));
  MleResult out;
  out.loss = g.value(nll).item();
  out.estimate.gradient = g.gradients(nll, params.tensors());
  out.estimate.feedback = 0.0;
  out.estimate.provenance = Provenance::Mle;
  return out;
}

ScoredSample score_sample(std::span<const TokenId> source, std::span<const TokenId> tokens,
                          const ModelParams& params) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  Var lp = m.sequence_log_prob(enc, tokens);
  return {g.value(lp).item(), g.gradients(lp, params.tensors())};
}

GradientEstimate el_gradient(const GradientMap& score, double delta) {
  GradientEstimate est{score, delta, Provenance::El};
  est.gradient.scale(delta);
  return est;
}

GradientEstimate el_gradient(std::span<const TokenId> source, const SampledSequence& sample,
                             double delta, const ModelParams& params) {
  if (!std::isfinite(delta)) throw NumericError("el_gradient: non-finite feedback");
  ScoredSample scored = score_sample(source, sample.tokens, params);
  require_consistent(scored.log_prob, sample.log_prob, "el_gradient");
  return el_gradient(scored.score, delta);
}

ScoredPair score_pair(std::span<const TokenId> source, const SampledPair& pair,
                      const ModelParams& params) {
  if (pair.positive.empty() || pair.perturbed.empty())
    throw ContractError("score_pair: empty pair member");
  const std::size_t steps = std::max(pair.positive.size(), pair.perturbed.size());
  if (pair.greedy.size() < steps - 1)
    throw ContractError("score_pair: greedy prefix shorter than the pair");
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  std::vector<Var> logits = m.logits_along(enc, pair.greedy, steps);
  auto total = [&](const std::vector<TokenId>& seq, std::optional<std::size_t> negated) {
    Var sum = g.log_softmax_at(logits[0], seq[0], negated == std::size_t{0});
    for (std::size_t t = 1; t < seq.size(); ++t)
      sum = g.add(sum, g.log_softmax_at(logits[t], seq[t], negated == t));
    return sum;
  };
  Var positive = total(pair.positive, std::nullopt);
  Var perturbed = total(pair.perturbed, pair.position - 1);
  ScoredPair out;
  out.log_prob = g.value(positive).item() + g.value(perturbed).item();
  out.positive = g.gradients(positive, params.tensors());
  out.perturbed = g.gradients(perturbed, params.tensors());
  return out;
}

GradientEstimate pr_gradient(const ScoredPair& scores, double delta_pair) {
  GradientEstimate est{scores.positive, delta_pair, Provenance::Pr};
  est.gradient.axpy(1.0, scores.perturbed);
  est.gradient.scale(delta_pair);
  return est;
}

GradientEstimate pr_gradient(std::span<const TokenId> source, const SampledPair& pair,
                             double delta_pair, const ModelParams& params) {
  if (!std::isfinite(delta_pair)) throw NumericError("pr_gradient: non-finite feedback");
  ScoredPair scores = score_pair(source, pair, params);
  require_consistent(scores.log_prob, pair.log_prob, "pr_gradient");
  return pr_gradient(scores, delta_pair);
}

}  // namespace bandit

#include "bandit/decode.hpp"

#include <optional>

#include "bandit/errors.hpp"

namespace bandit {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

namespace {

void require_limit(std::size_t max_len) {
  if (max_len == 0) throw ContractError("target length limit must be at least 1");
}

}  // namespace

Decoded greedy_decode(std::span<const TokenId> source, const ModelParams& params,
                      std::size_t max_len) {
  require_limit(max_len);
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  Var state = m.initial_state(enc);
  Decoded out;
  TokenId prev = kStartId;
  for (std::size_t t = 0; t < max_len; ++t) {
    DecoderOutput step = m.decoder_step(prev, state, enc);
    const auto next = static_cast<TokenId>(argmax(g.value(step.logits).values()));
    const auto att = g.value(step.attention).values();
    out.tokens.push_back(next);
    out.attention.emplace_back(att.begin(), att.end());
    if (next == kEndId) break;
    prev = next;
    state = step.state;
  }
  return out;
}

SampleTrace sample_structure(ModelGraph& model, const EncoderStates& enc, std::size_t max_len,
                             Rng& rng) {
  require_limit(max_len);
  Graph& g = model.graph();
  Var state = model.initial_state(enc);
  SampleTrace out;
  std::optional<Var> total;
  TokenId prev = kStartId;
  for (std::size_t t = 0; t < max_len; ++t) {
    DecoderOutput step = model.decoder_step(prev, state, enc);
    const auto logits = g.value(step.logits).values();
    const auto next = static_cast<TokenId>(rng.categorical(softmax_values(logits)));
    Var lp = g.log_softmax_at(step.logits, next);
    out.sample.log_prob += g.value(lp).item();
    total = total ? g.add(*total, lp) : lp;
    out.sample.tokens.push_back(next);
    if (next == kEndId) break;
    prev = next;
    state = step.state;
  }
  out.log_prob = *total;
  return out;
}

SampledSequence sample_structure(std::span<const TokenId> source, const ModelParams& params,
                                 std::size_t max_len, Rng& rng) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  return sample_structure(m, enc, max_len, rng).sample;
}

PairTrace sample_pair(ModelGraph& model, const EncoderStates& enc, std::size_t max_len, Rng& rng) {
  require_limit(max_len);
  Graph& g = model.graph();
  Var state = model.initial_state(enc);
  PairTrace out;
  SampledPair& pair = out.pair;
  pair.position = 1 + static_cast<std::size_t>(rng.below(max_len));
  std::optional<Var> positive_total, perturbed_total;
  bool positive_done = false, perturbed_done = false;
  TokenId prev = kStartId;
  for (std::size_t t = 1; t <= max_len && !(positive_done && perturbed_done); ++t) {
    DecoderOutput step = model.decoder_step(prev, state, enc);
    const auto logits = g.value(step.logits).values();
    const auto greedy = static_cast<TokenId>(argmax(logits));
    pair.greedy.push_back(greedy);
    if (!positive_done) {
      const auto w = static_cast<TokenId>(rng.categorical(softmax_values(logits)));
      Var lp = g.log_softmax_at(step.logits, w);
      pair.log_prob += g.value(lp).item();
      positive_total = positive_total ? g.add(*positive_total, lp) : lp;
      pair.positive.push_back(w);
      positive_done = w == kEndId;
    }
    if (!perturbed_done) {
      const bool negated = t == pair.position;
      const auto w = static_cast<TokenId>(rng.categorical(softmax_values(logits, negated)));
      Var lp = g.log_softmax_at(step.logits, w, negated);
      pair.log_prob += g.value(lp).item();
      perturbed_total = perturbed_total ? g.add(*perturbed_total, lp) : lp;
      pair.perturbed.push_back(w);
      perturbed_done = w == kEndId;
    }
    prev = greedy;
    state = step.state;
  }
  out.positive_log_prob = *positive_total;
  out.perturbed_log_prob = *perturbed_total;
  return out;
}

SampledPair sample_pair(std::span<const TokenId> source, const ModelParams& params,
                        std::size_t max_len, Rng& rng) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  return sample_pair(m, enc, max_len, rng).pair;
}

double pair_log_prob(std::span<const TokenId> source, const SampledPair& pair,
                     const ModelParams& params) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  const double positive = g.value(m.conditioned_log_prob(enc, pair.greedy, pair.positive)).item();
  const double perturbed = g.value(m.conditioned_log_prob(enc, pair.greedy, pair.perturbed,
                                                          pair.position - 1)).item();
  return positive + perturbed;
}

}  // namespace bandit

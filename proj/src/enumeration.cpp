#include "bandit/enumeration.hpp"

#include <optional>

#include "bandit/decode.hpp"
#include "bandit/errors.hpp"

namespace bandit {

std::vector<std::vector<TokenId>> enumerate_sequences(std::size_t vocab, std::size_t max_len,
                                                      std::size_t guard) {
  if (max_len == 0) throw ContractError("enumerate_sequences: max_len must be at least 1");
  if (vocab <= kEndId) throw ContractError("enumerate_sequences: vocabulary lacks END");
  // (V-1)^l sequences end with END at length l+1; (V-1)^max_len are truncated.
  double count = 0.0, power = 1.0;
  for (std::size_t l = 0; l < max_len; ++l) {
    count += power;
    power *= static_cast<double>(vocab - 1);
  }
  count += power;
  if (count > static_cast<double>(guard))
    throw SizeError("enumeration of " + std::to_string(static_cast<long long>(count)) +
                    " sequences exceeds the guard of " + std::to_string(guard));

  std::vector<std::vector<TokenId>> out;
  std::vector<std::vector<TokenId>> prefixes{{}};
  for (std::size_t l = 0; l < max_len; ++l) {
    std::vector<std::vector<TokenId>> next;
    for (const auto& p : prefixes) {
      auto ended = p;
      ended.push_back(kEndId);
      out.push_back(std::move(ended));
      for (TokenId w = 0; w < vocab; ++w) {
        if (w == kEndId) continue;
        auto q = p;
        q.push_back(w);
        next.push_back(std::move(q));
      }
    }
    prefixes = std::move(next);
  }
  for (auto& p : prefixes) out.push_back(std::move(p));
  return out;
}

std::vector<TokenId> greedy_prefix(std::span<const TokenId> source, const ModelParams& params,
                                   std::size_t steps) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  Var state = m.initial_state(enc);
  std::vector<TokenId> out;
  TokenId prev = kStartId;
  for (std::size_t t = 0; t < steps; ++t) {
    DecoderOutput step = m.decoder_step(prev, state, enc);
    prev = static_cast<TokenId>(argmax(g.value(step.logits).values()));
    out.push_back(prev);
    state = step.state;
  }
  return out;
}

ExactRisk exact_risk_and_grad(std::span<const TokenId> source, const ModelParams& params,
                              const SequenceLoss& delta, std::size_t max_len) {
  const auto sequences = enumerate_sequences(params.dims().vocab, max_len);
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  std::optional<Var> risk;
  for (const auto& y : sequences) {
    Var term = g.scale(g.exp(m.sequence_log_prob(enc, y)), delta(y));
    risk = risk ? g.add(*risk, term) : term;
  }
  return {g.value(*risk).item(), g.gradients(*risk, params.tensors())};
}

ExactRisk exact_pair_risk_and_grad(std::span<const TokenId> source, const ModelParams& params,
                                   const PairLoss& delta, std::size_t max_len) {
  const auto sequences = enumerate_sequences(params.dims().vocab, max_len);
  if (sequences.size() * sequences.size() * max_len > kEnumerationGuard)
    throw SizeError("pair enumeration exceeds the guard");
  const auto prefix = greedy_prefix(source, params, max_len);

  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  std::vector<Var> logits = m.logits_along(enc, prefix, max_len);
  auto log_prob = [&](const std::vector<TokenId>& y, std::optional<std::size_t> negated) {
    Var sum = g.log_softmax_at(logits[0], y[0], negated == std::size_t{0});
    for (std::size_t t = 1; t < y.size(); ++t)
      sum = g.add(sum, g.log_softmax_at(logits[t], y[t], negated == t));
    return sum;
  };

  std::vector<Var> positive;
  positive.reserve(sequences.size());
  for (const auto& y : sequences) positive.push_back(log_prob(y, std::nullopt));

  const double position_prob = 1.0 / static_cast<double>(max_len);
  std::optional<Var> risk;
  for (std::size_t i = 0; i < max_len; ++i) {
    for (const auto& yj : sequences) {
      Var perturbed = log_prob(yj, i);
      for (std::size_t a = 0; a < sequences.size(); ++a) {
        const double loss = delta(sequences[a], yj);
        if (loss == 0.0) continue;
        Var term = g.scale(g.exp(g.add(positive[a], perturbed)), position_prob * loss);
        risk = risk ? g.add(*risk, term) : term;
      }
    }
  }
  if (!risk) return {0.0, params.tensors().zeros_like()};
  return {g.value(*risk).item(), g.gradients(*risk, params.tensors())};
}

}  // namespace bandit

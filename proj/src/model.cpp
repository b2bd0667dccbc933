#include "bandit/model.hpp"

#include <cmath>
#include <string>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

const char* const kGruGates[] = {"z", "r", "h"};

void add_gru(ParamSet& ps, const std::string& prefix, const ModelDims& d, bool with_context) {
  const std::size_t H = d.hidden, E = d.embed;
  for (auto gate : kGruGates) ps.add(prefix + ".W_" + gate, Tensor({H, E}));
  if (with_context)
    for (auto gate : kGruGates) ps.add(prefix + ".C_" + gate, Tensor({H, 2 * H}));
  for (auto gate : kGruGates) ps.add(prefix + ".U_" + gate, Tensor({H, H}));
  for (auto gate : kGruGates) ps.add(prefix + ".b_" + gate, Tensor({H}));
}

ParamSet layout(const ModelDims& d) {
  if (d.vocab < kReservedTokens || d.embed == 0 || d.hidden == 0)
    throw ShapeError("model dimensions must be positive and cover the reserved tokens");
  const std::size_t V = d.vocab, E = d.embed, H = d.hidden;
  ParamSet ps;
  ps.add("src_embed", Tensor({V, E}));
  ps.add("tgt_embed", Tensor({V, E}));
  add_gru(ps, "enc_fwd", d, false);
  add_gru(ps, "enc_bwd", d, false);
  add_gru(ps, "dec", d, true);
  ps.add("att.W", Tensor({H, H}));
  ps.add("att.U", Tensor({2 * H, H}));
  ps.add("att.v", Tensor({H}));
  ps.add("init.W", Tensor({H, H}));
  ps.add("init.b", Tensor({H}));
  ps.add("out.S", Tensor({V, H}));
  ps.add("out.C", Tensor({V, 2 * H}));
  ps.add("out.E", Tensor({V, E}));
  ps.add("out.b", Tensor({V}));
  return ps;
}

ModelParams::GruSlots gru_slots(const ParamSet& ps, const std::string& prefix, bool ctx) {
  ModelParams::GruSlots s{};
  s.W_z = ps.index(prefix + ".W_z");
  s.W_r = ps.index(prefix + ".W_r");
  s.W_h = ps.index(prefix + ".W_h");
  s.U_z = ps.index(prefix + ".U_z");
  s.U_r = ps.index(prefix + ".U_r");
  s.U_h = ps.index(prefix + ".U_h");
  s.b_z = ps.index(prefix + ".b_z");
  s.b_r = ps.index(prefix + ".b_r");
  s.b_h = ps.index(prefix + ".b_h");
  if (ctx) {
    s.C_z = ps.index(prefix + ".C_z");
    s.C_r = ps.index(prefix + ".C_r");
    s.C_h = ps.index(prefix + ".C_h");
  }
  return s;
}

}  // namespace

ModelParams ModelParams::zeros(const ModelDims& dims) {
  ModelParams m;
  m.dims_ = dims;
  m.tensors_ = layout(dims);
  m.bind_slots();
  return m;
}

ModelParams ModelParams::random(const ModelDims& dims, std::uint64_t seed, double scale) {
  ModelParams m = zeros(dims);
  Rng rng(seed);
  for (auto& t : m.tensors_)
    for (auto& v : t.values()) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

ModelParams ModelParams::from_tensors(ParamSet tensors) {
  if (!tensors.contains("src_embed") || !tensors.contains("init.W"))
    throw ShapeError("parameter set is missing model tensors");
  const Tensor& emb = tensors["src_embed"];
  const Tensor& init = tensors["init.W"];
  if (emb.rank() != 2 || init.rank() != 2) throw ShapeError("malformed model tensors");
  ModelDims dims{emb.dim(0), emb.dim(1), init.dim(0)};
  ParamSet expected = layout(dims);
  expected.require_same_layout(tensors, "model parameters");
  ModelParams m;
  m.dims_ = dims;
  m.tensors_ = std::move(tensors);
  m.bind_slots();
  return m;
}

void ModelParams::bind_slots() {
  const ParamSet& ps = tensors_;
  slots_.src_embed = ps.index("src_embed");
  slots_.tgt_embed = ps.index("tgt_embed");
  slots_.enc_fwd = gru_slots(ps, "enc_fwd", false);
  slots_.enc_bwd = gru_slots(ps, "enc_bwd", false);
  slots_.dec = gru_slots(ps, "dec", true);
  slots_.att_W = ps.index("att.W");
  slots_.att_U = ps.index("att.U");
  slots_.att_v = ps.index("att.v");
  slots_.init_W = ps.index("init.W");
  slots_.init_b = ps.index("init.b");
  slots_.out_S = ps.index("out.S");
  slots_.out_C = ps.index("out.C");
  slots_.out_E = ps.index("out.E");
  slots_.out_b = ps.index("out.b");
}

ModelGraph::ModelGraph(Graph& graph, const ModelParams& params, Dropout dropout)
    : g_(graph), p_(params), dropout_(dropout), cache_(params.tensors().size()) {}

Var ModelGraph::param(std::size_t slot) {
  auto& c = cache_.at(slot);
  if (!c) c = g_.parameter(p_.tensors(), slot);
  return *c;
}

void ModelGraph::check_token(TokenId id) const {
  if (id >= p_.dims().vocab)
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(p_.dims().vocab));
}

Var ModelGraph::gru(const ModelParams::GruSlots& s, Var input, Var state,
                    std::optional<Var> context) {
  auto pre = [&](std::size_t W, std::size_t C, std::size_t b) {
    Var v = g_.add(g_.matvec(param(W), input), param(b));
    if (context) v = g_.add(v, g_.matvec(param(C), *context));
    return v;
  };
  Var z = g_.sigmoid(g_.add(pre(s.W_z, s.C_z, s.b_z), g_.matvec(param(s.U_z), state)));
  Var r = g_.sigmoid(g_.add(pre(s.W_r, s.C_r, s.b_r), g_.matvec(param(s.U_r), state)));
  Var cand = g_.tanh(g_.add(pre(s.W_h, s.C_h, s.b_h), g_.matvec(param(s.U_h), g_.mul(r, state))));
  // h' = (1 - z) h + z cand
  return g_.add(state, g_.mul(z, g_.sub(cand, state)));
}

EncoderStates ModelGraph::encode(std::span<const TokenId> source) {
  if (source.empty()) throw ContractError("encode: empty source sequence");
  for (auto id : source) check_token(id);
  const std::size_t T = source.size();
  const auto& sl = p_.slots();
  Var zero = g_.constant(Tensor({p_.dims().hidden}));
  std::vector<Var> inputs(T), fwd(T), bwd(T);
  for (std::size_t t = 0; t < T; ++t) inputs[t] = g_.embedding(param(sl.src_embed), source[t]);
  Var h = zero;
  for (std::size_t t = 0; t < T; ++t) fwd[t] = h = gru(sl.enc_fwd, inputs[t], h, std::nullopt);
  h = zero;
  for (std::size_t t = T; t-- > 0;) bwd[t] = h = gru(sl.enc_bwd, inputs[t], h, std::nullopt);
  std::vector<Var> rows(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Var parts[] = {fwd[t], bwd[t]};
    rows[t] = g_.concat(parts);
  }
  EncoderStates enc;
  enc.states = g_.stack_rows(rows);
  enc.keys = g_.matmul(enc.states, param(sl.att_U));
  enc.backward_first = bwd[0];
  enc.length = T;
  return enc;
}

Var ModelGraph::initial_state(const EncoderStates& enc) {
  const auto& sl = p_.slots();
  return g_.tanh(g_.add(g_.matvec(param(sl.init_W), enc.backward_first), param(sl.init_b)));
}

std::pair<Var, Var> ModelGraph::attention_context(Var state, const EncoderStates& enc) {
  const auto& sl = p_.slots();
  Var query = g_.matvec(param(sl.att_W), state);
  Var weights = g_.softmax(g_.additive_energy(query, enc.keys, param(sl.att_v)));
  Var context = g_.vecmat(weights, enc.states);
  return {context, weights};
}

Var ModelGraph::embed_target(TokenId id) {
  check_token(id);
  return g_.embedding(param(p_.slots().tgt_embed), id);
}

DecoderOutput ModelGraph::decoder_step(TokenId prev, Var state, const EncoderStates& enc) {
  const auto& sl = p_.slots();
  auto [context, weights] = attention_context(state, enc);
  Var e = embed_target(prev);
  Var next = gru(sl.dec, e, state, context);
  Var s_out = next, c_out = context;
  if (dropout_.rate > 0.0 && dropout_.rng) {
    auto mask = [&](std::size_t n) {
      Tensor m({n});
      const double keep = 1.0 - dropout_.rate;
      for (auto& v : m.values()) v = dropout_.rng->uniform() < keep ? 1.0 / keep : 0.0;
      return g_.constant(std::move(m));
    };
    s_out = g_.mul(next, mask(p_.dims().hidden));
    c_out = g_.mul(context, mask(2 * p_.dims().hidden));
  }
  Var logits = g_.add(g_.matvec(param(sl.out_S), s_out), g_.matvec(param(sl.out_C), c_out));
  logits = g_.add(g_.add(logits, g_.matvec(param(sl.out_E), e)), param(sl.out_b));
  return {logits, next, weights, context};
}

std::vector<Var> ModelGraph::logits_along(const EncoderStates& enc,
                                          std::span<const TokenId> conditioning,
                                          std::size_t steps) {
  if (steps > conditioning.size() + 1)
    throw ContractError("logits_along: conditioning prefix too short");
  std::vector<Var> out;
  out.reserve(steps);
  Var state = initial_state(enc);
  for (std::size_t t = 0; t < steps; ++t) {
    const TokenId prev = t == 0 ? kStartId : conditioning[t - 1];
    DecoderOutput step = decoder_step(prev, state, enc);
    out.push_back(step.logits);
    state = step.state;
  }
  return out;
}

Var ModelGraph::conditioned_log_prob(const EncoderStates& enc,
                                     std::span<const TokenId> conditioning,
                                     std::span<const TokenId> emitted,
                                     std::optional<std::size_t> negated_step) {
  if (emitted.empty()) throw ContractError("log-probability of an empty sequence");
  for (auto id : emitted) check_token(id);
  std::vector<Var> logits = logits_along(enc, conditioning, emitted.size());
  Var total = g_.log_softmax_at(logits[0], emitted[0], negated_step == std::size_t{0});
  for (std::size_t t = 1; t < emitted.size(); ++t)
    total = g_.add(total, g_.log_softmax_at(logits[t], emitted[t], negated_step == t));
  return total;
}

Var ModelGraph::sequence_log_prob(const EncoderStates& enc, std::span<const TokenId> target,
                                  OutputMode mode) {
  if (target.empty()) throw ContractError("sequence_log_prob: empty target");
  if (mode == OutputMode::Positive) return conditioned_log_prob(enc, target, target);
  for (auto id : target) check_token(id);
  std::vector<Var> logits = logits_along(enc, target, target.size());
  Var total = g_.log_softmax_at(logits[0], target[0], true);
  for (std::size_t t = 1; t < target.size(); ++t)
    total = g_.add(total, g_.log_softmax_at(logits[t], target[t], true));
  return total;
}

Tensor encode(std::span<const TokenId> source, const ModelParams& params) {
  Graph g;
  ModelGraph m(g, params);
  return g.value(m.encode(source).states);
}

namespace {

EncoderStates constant_encoder(Graph& g, ModelGraph& m, const Tensor& states,
                               const ModelParams& params) {
  if (states.rank() != 2 || states.dim(1) != 2 * params.dims().hidden)
    throw ShapeError("encoder states must have shape [T," + std::to_string(2 * params.dims().hidden) +
                     "], got " + to_string(states.shape()));
  EncoderStates enc;
  enc.states = g.constant(states);
  enc.keys = g.matmul(enc.states, m.param(params.slots().att_U));
  enc.length = states.dim(0);
  return enc;
}

}  // namespace

AttentionResult attention_context(const Tensor& decoder_state, const Tensor& encoder_states,
                                  const ModelParams& params) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = constant_encoder(g, m, encoder_states, params);
  auto [c, a] = m.attention_context(g.constant(decoder_state), enc);
  return {g.value(c), g.value(a)};
}

StepResult decoder_step(TokenId prev, const Tensor& prev_state, const Tensor& encoder_states,
                        const ModelParams& params) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = constant_encoder(g, m, encoder_states, params);
  DecoderOutput out = m.decoder_step(prev, g.constant(prev_state), enc);
  return {g.value(out.logits), g.value(out.state), g.value(out.attention)};
}

Tensor output_distribution(const Tensor& logits, OutputMode mode) {
  Graph g;
  Var x = g.constant(logits);
  if (mode == OutputMode::Negative) x = g.neg(x);
  return g.value(g.softmax(x));
}

double sequence_log_prob(std::span<const TokenId> source, std::span<const TokenId> target,
                         const ModelParams& params, OutputMode mode) {
  Graph g;
  ModelGraph m(g, params);
  EncoderStates enc = m.encode(source);
  return g.value(m.sequence_log_prob(enc, target, mode)).item();
}

}  // namespace bandit

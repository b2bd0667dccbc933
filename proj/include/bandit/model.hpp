#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bandit/autodiff.hpp"
#include "bandit/param_set.hpp"
#include "bandit/rng.hpp"
#include "bandit/vocabulary.hpp"

namespace bandit {

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t embed = 32;
  std::size_t hidden = 64;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Parameters of the bidirectional-GRU encoder / attention GRU decoder.
///
/// Shapes (V vocab, E embed, H hidden):
///   src_embed, tgt_embed                    [V,E]
///   enc_fwd.* and enc_bwd.*: W_{z,r,h} [H,E], U_{z,r,h} [H,H], b_{z,r,h} [H]
///   dec.*: W_{z,r,h} [H,E], C_{z,r,h} [H,2H], U_{z,r,h} [H,H], b_{z,r,h} [H]
///   att.W [H,H], att.U [2H,H], att.v [H]
///   init.W [H,H], init.b [H]
///   out.S [V,H], out.C [V,2H], out.E [V,E], out.b [V]
class ModelParams {
 public:
  ModelParams() = default;
  static ModelParams zeros(const ModelDims& dims);
  /// Uniform initialization in [-scale, scale].
  static ModelParams random(const ModelDims& dims, std::uint64_t seed, double scale = 0.1);
  /// Adopts tensors loaded from disk; throws ShapeError on any inconsistency.
  static ModelParams from_tensors(ParamSet tensors);

  const ModelDims& dims() const noexcept { return dims_; }
  ParamSet& tensors() noexcept { return tensors_; }
  const ParamSet& tensors() const noexcept { return tensors_; }

  struct GruSlots {
    std::size_t W_z, W_r, W_h, U_z, U_r, U_h, b_z, b_r, b_h;
    std::size_t C_z = 0, C_r = 0, C_h = 0;  // decoder only
  };
  struct Slots {
    std::size_t src_embed, tgt_embed;
    GruSlots enc_fwd, enc_bwd, dec;
    std::size_t att_W, att_U, att_v, init_W, init_b, out_S, out_C, out_E, out_b;
  };
  const Slots& slots() const noexcept { return slots_; }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims_ == b.dims_ && a.tensors_ == b.tensors_;
  }

 private:
  void bind_slots();

  ModelDims dims_;
  ParamSet tensors_;
  Slots slots_{};
};

enum class OutputMode { Positive, Negative };

struct EncoderStates {
  Var states;          // [T,2H], row t = [forward_t ; backward_t]
  Var keys;            // [T,H], attention keys states * att.U
  Var backward_first;  // backward GRU state at position 1
  std::size_t length = 0;
};

struct DecoderOutput {
  Var logits;     // [V]
  Var state;      // [H]
  Var attention;  // [T]
  Var context;    // [2H]
};

/// Inverted dropout on the decoder's pre-output inputs; only used when
/// pretraining with a non-zero rate.
struct Dropout {
  double rate = 0.0;
  Rng* rng = nullptr;
};

/// Builds the model's computations on a caller-owned graph.
class ModelGraph {
 public:
  ModelGraph(Graph& graph, const ModelParams& params, Dropout dropout = {});

  EncoderStates encode(std::span<const TokenId> source);
  Var initial_state(const EncoderStates& enc);
  /// Returns {context [2H], weights [T]}.
  std::pair<Var, Var> attention_context(Var state, const EncoderStates& enc);
  DecoderOutput decoder_step(TokenId prev, Var state, const EncoderStates& enc);

  /// Sum over t of log p(emitted[t] | x, conditioning[<t]); the decoder input at
  /// step t is START for t = 0 and conditioning[t-1] otherwise. Step
  /// `negated_step` (0-based) is scored with p-, all others with p+.
  Var conditioned_log_prob(const EncoderStates& enc, std::span<const TokenId> conditioning,
                           std::span<const TokenId> emitted,
                           std::optional<std::size_t> negated_step = std::nullopt);
  /// Teacher-forced log-probability of `target` under one output mode.
  Var sequence_log_prob(const EncoderStates& enc, std::span<const TokenId> target,
                        OutputMode mode = OutputMode::Positive);
  /// Decoder logits for `steps` steps driven by `conditioning`.
  std::vector<Var> logits_along(const EncoderStates& enc, std::span<const TokenId> conditioning,
                                std::size_t steps);

  Graph& graph() noexcept { return g_; }
  Var param(std::size_t slot);

 private:
  Var gru(const ModelParams::GruSlots& s, Var input, Var state, std::optional<Var> context);
  Var embed_target(TokenId id);
  void check_token(TokenId id) const;

  Graph& g_;
  const ModelParams& p_;
  Dropout dropout_;
  std::vector<std::optional<Var>> cache_;
};

// Tensor-valued conveniences (each builds and discards its own graph).

/// Encoder states [T,2H] for `source`.
Tensor encode(std::span<const TokenId> source, const ModelParams& params);

struct AttentionResult {
  Tensor context;
  Tensor weights;
};
AttentionResult attention_context(const Tensor& decoder_state, const Tensor& encoder_states,
                                  const ModelParams& params);

struct StepResult {
  Tensor logits;
  Tensor state;
  Tensor attention;
};
StepResult decoder_step(TokenId prev, const Tensor& prev_state, const Tensor& encoder_states,
                        const ModelParams& params);

/// softmax(o) for Positive, softmax(-o) for Negative.
Tensor output_distribution(const Tensor& logits, OutputMode mode);

double sequence_log_prob(std::span<const TokenId> source, std::span<const TokenId> target,
                         const ModelParams& params, OutputMode mode = OutputMode::Positive);

}  // namespace bandit

#pragma once

#include <cmath>
#include <vector>

#include "bandit/model.hpp"
#include "bandit/param_set.hpp"
#include "bandit/rng.hpp"

namespace testing {

using bandit::GradientMap;
using bandit::ModelParams;
using bandit::TokenId;

// |V| = 3 counting the reserved ids, so the only non-reserved token is 2 (UNK).
inline ModelParams tiny_model(std::uint64_t seed, std::size_t vocab = 3, std::size_t embed = 4,
                              std::size_t hidden = 4, double scale = 0.8) {
  return ModelParams::random({vocab, embed, hidden}, seed, scale);
}

inline double max_abs(const GradientMap& g) {
  double m = 0.0;
  for (const auto& t : g)
    for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

// ||a - b|| / ||b||
inline double relative_distance(const GradientMap& a, const GradientMap& b) {
  GradientMap d = a;
  d.axpy(-1.0, b);
  return d.norm() / b.norm();
}

inline std::vector<TokenId> random_tokens(bandit::Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<TokenId> out(len);
  for (auto& t : out) t = static_cast<TokenId>(rng.below(vocab));
  return out;
}

}  // namespace testing

#include "bandit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

NGramMultiset::NGramMultiset(std::span<const TokenId> tokens, std::size_t max_n)
    : max_n_(max_n), totals_(max_n + 1, 0) {
  if (max_n == 0) throw ContractError("n-gram order must be at least 1");
  for (std::size_t n = 1; n <= max_n && n <= tokens.size(); ++n)
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts_[std::vector<TokenId>(tokens.begin() + i, tokens.begin() + i + n)];
      ++totals_[n];
    }
}

std::size_t NGramMultiset::count(const std::vector<TokenId>& gram) const {
  auto it = counts_.find(gram);
  return it == counts_.end() ? 0 : it->second;
}

std::size_t NGramMultiset::total(std::size_t order) const {
  return order < totals_.size() ? totals_[order] : 0;
}

std::size_t NGramMultiset::clipped_matches(const NGramMultiset& other, std::size_t order) const {
  std::size_t m = 0;
  for (const auto& [gram, c] : counts_)
    if (gram.size() == order) m += std::min(c, other.count(gram));
  return m;
}

double GleuStats::score() const {
  if (hypothesis_total == 0 || reference_total == 0) return 0.0;
  const double precision = static_cast<double>(matches) / static_cast<double>(hypothesis_total);
  const double recall = static_cast<double>(matches) / static_cast<double>(reference_total);
  return std::min(precision, recall);
}

GleuStats ggleu_stats(std::span<const TokenId> hypothesis, std::span<const TokenId> reference,
                      std::size_t max_n) {
  if (reference.empty()) throw ContractError("gGLEU requires a non-empty reference");
  NGramMultiset hyp(hypothesis, max_n), ref(reference, max_n);
  GleuStats s;
  for (std::size_t n = 1; n <= max_n; ++n) {
    s.matches += hyp.clipped_matches(ref, n);
    s.hypothesis_total += hyp.total(n);
    s.reference_total += ref.total(n);
  }
  return s;
}

double ggleu(std::span<const TokenId> hypothesis, std::span<const TokenId> reference,
             std::size_t max_n) {
  return ggleu_stats(hypothesis, reference, max_n).score();
}

namespace {

void require_parallel(std::size_t hyps, std::size_t refs) {
  if (hyps != refs)
    throw ContractError("corpus metric: " + std::to_string(hyps) + " hypotheses vs " +
                        std::to_string(refs) + " references");
}

}  // namespace

double corpus_ggleu(const std::vector<std::vector<TokenId>>& hypotheses,
                    const std::vector<std::vector<TokenId>>& references, std::size_t max_n) {
  require_parallel(hypotheses.size(), references.size());
  GleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i)
    total += ggleu_stats(hypotheses[i], references[i], max_n);
  return total.score();
}

double corpus_bleu(const std::vector<std::vector<TokenId>>& hypotheses,
                   const std::vector<std::vector<TokenId>>& references, std::size_t max_n) {
  require_parallel(hypotheses.size(), references.size());
  std::vector<std::size_t> matches(max_n + 1, 0), hyp_totals(max_n + 1, 0), ref_totals(max_n + 1, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (references[i].empty()) throw ContractError("corpus BLEU requires non-empty references");
    NGramMultiset hyp(hypotheses[i], max_n), ref(references[i], max_n);
    for (std::size_t n = 1; n <= max_n; ++n) {
      matches[n] += hyp.clipped_matches(ref, n);
      hyp_totals[n] += hyp.total(n);
      ref_totals[n] += ref.total(n);
    }
    hyp_len += hypotheses[i].size();
    ref_len += references[i].size();
  }
  if (hyp_len == 0) return 0.0;
  double log_precision = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    // An order absent from both sides (all sentences too short) carries no evidence.
    if (hyp_totals[n] == 0 && ref_totals[n] == 0) continue;
    if (matches[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matches[n]) / static_cast<double>(hyp_totals[n]));
    ++orders;
  }
  const double brevity =
      hyp_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
                        : 1.0;
  return brevity * std::exp(log_precision / static_cast<double>(orders));
}

}  // namespace bandit

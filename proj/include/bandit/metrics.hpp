#pragma once

#include <map>
#include <span>
#include <vector>

#include "bandit/vocabulary.hpp"

namespace bandit {

inline constexpr std::size_t kDefaultMaxOrder = 4;

/// Counts of all n-grams of order 1..max_n in a token sequence.
class NGramMultiset {
 public:
  NGramMultiset(std::span<const TokenId> tokens, std::size_t max_n);

  std::size_t count(const std::vector<TokenId>& gram) const;
  /// Number of n-gram occurrences (with multiplicity) of one order.
  std::size_t total(std::size_t order) const;
  /// Sum of min(count_this, count_other) over n-grams of one order.
  std::size_t clipped_matches(const NGramMultiset& other, std::size_t order) const;
  std::size_t max_order() const noexcept { return max_n_; }
  const std::map<std::vector<TokenId>, std::size_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t max_n_;
  std::map<std::vector<TokenId>, std::size_t> counts_;
  std::vector<std::size_t> totals_;
};

/// Sufficient statistics for gGLEU, summed over all orders.
struct GleuStats {
  std::size_t matches = 0;
  std::size_t hypothesis_total = 0;
  std::size_t reference_total = 0;

  GleuStats& operator+=(const GleuStats& o) {
    matches += o.matches;
    hypothesis_total += o.hypothesis_total;
    reference_total += o.reference_total;
    return *this;
  }
  /// min(precision, recall); 0 when either total is zero.
  double score() const;
};

GleuStats ggleu_stats(std::span<const TokenId> hypothesis, std::span<const TokenId> reference,
                      std::size_t max_n = kDefaultMaxOrder);

/// Sentence-level gGLEU: min of n-gram precision and recall with matches and
/// totals pooled over orders 1..max_n. Throws ContractError on an empty reference.
double ggleu(std::span<const TokenId> hypothesis, std::span<const TokenId> reference,
             std::size_t max_n = kDefaultMaxOrder);

/// gGLEU with statistics pooled over the whole corpus.
double corpus_ggleu(const std::vector<std::vector<TokenId>>& hypotheses,
                    const std::vector<std::vector<TokenId>>& references,
                    std::size_t max_n = kDefaultMaxOrder);

/// Corpus BLEU: geometric mean of corpus-level modified n-gram precisions
/// times the brevity penalty, unsmoothed.
double corpus_bleu(const std::vector<std::vector<TokenId>>& hypotheses,
                   const std::vector<std::vector<TokenId>>& references,
                   std::size_t max_n = kDefaultMaxOrder);

}  // namespace bandit

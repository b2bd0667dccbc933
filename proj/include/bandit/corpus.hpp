#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bandit/vocabulary.hpp"

namespace bandit {

using Sentence = std::vector<std::string>;

struct Corpus {
  std::vector<Sentence> source;
  std::vector<Sentence> target;
  std::string domain;
  std::string split;

  std::size_t size() const noexcept { return source.size(); }
  /// No empty sentences, aligned sides, every sentence at most `max_len` tokens.
  void validate(std::size_t max_len) const;
};

/// Reads line-aligned, whitespace-tokenized source/target files.
Corpus read_corpus(const std::filesystem::path& source, const std::filesystem::path& target,
                   std::size_t max_len, std::string domain = {}, std::string split = {});
void write_corpus(const Corpus& corpus, const std::filesystem::path& source,
                  const std::filesystem::path& target);
std::vector<Sentence> read_sentences(const std::filesystem::path& path);

struct SyntheticTaskSpec {
  std::size_t lexicon_size = 10;
  double overlap = 0.7;
  bool reorder_a = true;
  bool reorder_b = true;
  // Sampling weight of the differing entries relative to the shared ones:
  // `domain_skew` in domain B sentences, 1 / `domain_skew` in domain A.
  double domain_skew = 5.0;
  std::size_t min_length = 2;
  std::size_t max_length = 6;
  std::size_t a_train = 10000, a_valid = 1000, a_test = 1000;
  std::size_t b_train = 2000, b_valid = 500, b_test = 500;
  std::uint64_t seed = 1;

  void validate() const;
  /// Number of lexicon entries on which domain B differs from domain A.
  std::size_t differing_entries() const;
};

struct SyntheticData {
  std::vector<std::string> source_words;
  std::vector<std::string> lexicon_a;  // target word for source_words[i]
  std::vector<std::string> lexicon_b;
  Corpus a_train, a_valid, a_test;
  Corpus b_train, b_valid, b_test;

  std::vector<const Corpus*> corpora() const;
};

/// Deterministic in `spec`. Domain B's lexicon cyclically permutes the
/// targets of `differing_entries()` randomly chosen entries of domain A's;
/// those entries are frequent in domain B and rare in domain A.
SyntheticData gen_data(const SyntheticTaskSpec& spec);
/// Translates one source sentence under a lexicon and the reordering flag.
Sentence translate(const Sentence& source, const std::vector<std::string>& source_words,
                   const std::vector<std::string>& lexicon, bool reorder);

/// Writes `<domain>.<split>.src|tgt` files into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);
std::filesystem::path corpus_path(const std::filesystem::path& dir, std::string_view domain,
                                  std::string_view split, std::string_view side);

/// Reserved tokens first, then tokens with count >= cutoff by descending
/// count, ties lexicographic.
Vocabulary build_vocab(const std::vector<std::span<const Sentence>>& sentences,
                       std::size_t cutoff);

/// Replaces each UNK in `target` by the source token with the largest
/// attention weight at that step (ties: lowest position).
std::vector<std::string> unk_replace(std::span<const std::string> target,
                                     const std::vector<std::vector<double>>& attention,
                                     std::span<const std::string> source);

std::vector<TokenId> encode_sentence(const Vocabulary& vocab, const Sentence& words);
/// Appends END.
std::vector<TokenId> encode_target(const Vocabulary& vocab, const Sentence& words);

}  // namespace bandit

#include "bandit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "bandit/errors.hpp"
#include "bandit/rng.hpp"

namespace bandit {

void Corpus::validate(std::size_t max_len) const {
  if (source.size() != target.size())
    throw FormatError("corpus sides differ in length: " + std::to_string(source.size()) + " vs " +
                      std::to_string(target.size()));
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (const Sentence* s : {&source[i], &target[i]}) {
      if (s->empty()) throw FormatError("empty sentence at line " + std::to_string(i + 1));
      if (s->size() > max_len)
        throw FormatError("sentence at line " + std::to_string(i + 1) + " has " +
                          std::to_string(s->size()) + " tokens, limit " + std::to_string(max_len));
    }
  }
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file " + path.string());
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    Sentence s;
    for (std::string w; words >> w;) s.push_back(std::move(w));
    out.push_back(std::move(s));
  }
  return out;
}

Corpus read_corpus(const std::filesystem::path& source, const std::filesystem::path& target,
                   std::size_t max_len, std::string domain, std::string split) {
  Corpus c{read_sentences(source), read_sentences(target), std::move(domain), std::move(split)};
  c.validate(max_len);
  return c;
}

namespace {

void write_lines(const std::vector<Sentence>& sentences, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::filesystem::path& source,
                  const std::filesystem::path& target) {
  write_lines(corpus.source, source);
  write_lines(corpus.target, target);
}

void SyntheticTaskSpec::validate() const {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("overlap must lie in [0, 1]");
  if (lexicon_size < 2) throw ConfigError("lexicon_size must be at least 2");
  if (!(domain_skew > 0.0) || !std::isfinite(domain_skew))
    throw ConfigError("domain_skew must be positive");
  if (min_length == 0 || min_length > max_length)
    throw ConfigError("sentence lengths need 1 <= min_length <= max_length");
  for (std::size_t n : {a_train, a_valid, a_test, b_train, b_valid, b_test})
    if (n == 0) throw ConfigError("corpus sizes must be positive");
}

std::size_t SyntheticTaskSpec::differing_entries() const {
  return static_cast<std::size_t>(std::lround((1.0 - overlap) * static_cast<double>(lexicon_size)));
}

Sentence translate(const Sentence& source, const std::vector<std::string>& source_words,
                   const std::vector<std::string>& lexicon, bool reorder) {
  Sentence out;
  out.reserve(source.size());
  for (const auto& w : source) {
    const auto it = std::find(source_words.begin(), source_words.end(), w);
    if (it == source_words.end()) throw ContractError("word outside the lexicon: " + w);
    out.push_back(lexicon[static_cast<std::size_t>(it - source_words.begin())]);
  }
  if (reorder)
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) std::swap(out[i], out[i + 1]);
  return out;
}

std::vector<const Corpus*> SyntheticData::corpora() const {
  return {&a_train, &a_valid, &a_test, &b_train, &b_valid, &b_test};
}

SyntheticData gen_data(const SyntheticTaskSpec& spec) {
  spec.validate();
  const std::size_t n = spec.lexicon_size;
  SyntheticData d;
  Rng lex_rng(derive_seed(spec.seed, 11));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), lex_rng.engine());
  for (std::size_t i = 0; i < n; ++i) {
    d.source_words.push_back("s" + std::to_string(i));
    d.lexicon_a.push_back("t" + std::to_string(perm[i]));
  }

  d.lexicon_b = d.lexicon_a;
  const std::size_t k = spec.differing_entries();
  std::vector<std::size_t> entries(n);
  std::iota(entries.begin(), entries.end(), 0);
  std::shuffle(entries.begin(), entries.end(), lex_rng.engine());
  entries.resize(k);
  std::sort(entries.begin(), entries.end());
  if (k == 1) {
    d.lexicon_b[entries[0]] = "t" + std::to_string(n);
  } else {
    for (std::size_t j = 0; j < k; ++j)
      d.lexicon_b[entries[j]] = d.lexicon_a[entries[(j + 1) % k]];
  }

  std::vector<double> weights_a(n, 1.0), weights_b(n, 1.0);
  for (std::size_t e : entries) {
    weights_a[e] = 1.0 / spec.domain_skew;
    weights_b[e] = spec.domain_skew;
  }
  auto normalized = [](std::vector<double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
  };
  weights_a = normalized(std::move(weights_a));
  weights_b = normalized(std::move(weights_b));

  auto make = [&](const std::vector<std::string>& lexicon, const std::vector<double>& weights,
                  bool reorder, std::size_t count, std::string domain, std::string split,
                  std::uint64_t offset) {
    Rng rng(derive_seed(spec.seed, offset));
    Corpus c{{}, {}, std::move(domain), std::move(split)};
    for (std::size_t s = 0; s < count; ++s) {
      const std::size_t len =
          spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
      Sentence src;
      for (std::size_t t = 0; t < len; ++t) src.push_back(d.source_words[rng.categorical(weights)]);
      c.target.push_back(translate(src, d.source_words, lexicon, reorder));
      c.source.push_back(std::move(src));
    }
    return c;
  };
  d.a_train = make(d.lexicon_a, weights_a, spec.reorder_a, spec.a_train, "A", "train", 21);
  d.a_valid = make(d.lexicon_a, weights_a, spec.reorder_a, spec.a_valid, "A", "valid", 22);
  d.a_test = make(d.lexicon_a, weights_a, spec.reorder_a, spec.a_test, "A", "test", 23);
  d.b_train = make(d.lexicon_b, weights_b, spec.reorder_b, spec.b_train, "B", "train", 24);
  d.b_valid = make(d.lexicon_b, weights_b, spec.reorder_b, spec.b_valid, "B", "valid", 25);
  d.b_test = make(d.lexicon_b, weights_b, spec.reorder_b, spec.b_test, "B", "test", 26);
  return d;
}

std::filesystem::path corpus_path(const std::filesystem::path& dir, std::string_view domain,
                                  std::string_view split, std::string_view side) {
  return dir / (std::string(domain) + "." + std::string(split) + "." + std::string(side));
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const Corpus* c : data.corpora())
    write_corpus(*c, corpus_path(dir, c->domain, c->split, "src"),
                 corpus_path(dir, c->domain, c->split, "tgt"));
}

Vocabulary build_vocab(const std::vector<std::span<const Sentence>>& sentences,
                       std::size_t cutoff) {
  std::map<std::string, std::size_t> counts;
  for (const auto& block : sentences)
    for (const auto& s : block)
      for (const auto& w : s)
        if (!is_reserved_token(w)) ++counts[w];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [w, c] : ranked)
    if (c >= cutoff) v.add(w);
  return v;
}

std::vector<std::string> unk_replace(std::span<const std::string> target,
                                     const std::vector<std::vector<double>>& attention,
                                     std::span<const std::string> source) {
  if (attention.size() < target.size())
    throw ContractError("unk_replace: " + std::to_string(target.size()) + " tokens but " +
                        std::to_string(attention.size()) + " attention vectors");
  std::vector<std::string> out(target.begin(), target.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t] != kUnkToken) continue;
    const auto& a = attention[t];
    if (a.size() != source.size())
      throw ContractError("unk_replace: attention vector " + std::to_string(t) + " has " +
                          std::to_string(a.size()) + " weights for " +
                          std::to_string(source.size()) + " source tokens");
    const auto best = std::max_element(a.begin(), a.end()) - a.begin();
    out[t] = source[static_cast<std::size_t>(best)];
  }
  return out;
}

std::vector<TokenId> encode_sentence(const Vocabulary& vocab, const Sentence& words) {
  return vocab.encode(words);
}

std::vector<TokenId> encode_target(const Vocabulary& vocab, const Sentence& words) {
  auto ids = vocab.encode(words);
  ids.push_back(kEndId);
  return ids;
}

}  // namespace bandit

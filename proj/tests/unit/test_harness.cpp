#include <algorithm>
#include <sstream>

#include "bandit/checkpoint.hpp"
#include "bandit/config.hpp"
#include "bandit/corpus.hpp"
#include "bandit/errors.hpp"
#include "bandit/experiment.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bandit;

namespace {

SyntheticTaskSpec small_spec(double overlap) {
  SyntheticTaskSpec s;
  s.overlap = overlap;
  s.a_train = 200;
  s.a_valid = s.a_test = 20;
  s.b_train = 100;
  s.b_valid = s.b_test = 20;
  s.seed = 9;
  return s;
}

Checkpoint sample_checkpoint(bool with_optimizer) {
  Checkpoint c;
  c.vocab = Vocabulary::from_tokens({"<s>", "</s>", "<unk>", "x", "y"});
  c.params = ModelParams::random({5, 3, 4}, 12, 0.3);
  if (with_optimizer) {
    OptimizerState opt = OptimizerState::for_params(c.params.tensors(), AdamConfig{3e-4, 0.8, 0.99, 1e-7});
    adam_update(c.params.tensors(), c.params.tensors(), opt);
    c.optimizer = opt;
  }
  c.metadata = {42, 7, 0xabcdef};
  return c;
}

}  // namespace

TEST_CASE("gen_data is deterministic and controls the domain shift") {
  const SyntheticData a = gen_data(small_spec(0.7));
  const SyntheticData b = gen_data(small_spec(0.7));
  CHECK(a.a_train.source == b.a_train.source);
  CHECK(a.b_test.target == b.b_test.target);
  CHECK(a.lexicon_b == b.lexicon_b);

  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.lexicon_a.size(); ++i) differ += a.lexicon_a[i] != a.lexicon_b[i];
  CHECK(differ == 3);
  CHECK(a.a_train.size() == 200);
  CHECK(a.b_valid.size() == 20);
  for (const Corpus* c : a.corpora()) CHECK_NOTHROW(c->validate(6));

  const SyntheticData same = gen_data(small_spec(1.0));
  CHECK(same.lexicon_a == same.lexicon_b);

  SyntheticTaskSpec bad = small_spec(0.7);
  bad.min_length = 0;
  CHECK_THROWS_AS(gen_data(bad), ConfigError);
}

TEST_CASE("translate follows the lexicon") {
  const std::vector<std::string> words{"s0", "s1", "s2"};
  const std::vector<std::string> lex{"t0", "t1", "t2"};
  CHECK(translate({"s2", "s0"}, words, lex, false) == Sentence{"t2", "t0"});
  const Sentence r = translate({"s2", "s0", "s1"}, words, lex, true);
  std::vector<std::string> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == Sentence{"t0", "t1", "t2"});
}

TEST_CASE("build_vocab ordering and cutoff") {
  const std::vector<Sentence> text{{"a", "a", "b"}, {"c", "b", "a"}};
  const Vocabulary v = build_vocab({std::span<const Sentence>(text)}, 1);
  CHECK(v.tokens() == std::vector<std::string>{"<s>", "</s>", "<unk>", "a", "b", "c"});
  const Vocabulary high = build_vocab({std::span<const Sentence>(text)}, 10);
  CHECK(high.size() == kReservedTokens);

  const std::vector<Sentence> one{{"a", "a", "b"}};
  const Vocabulary w = build_vocab({std::span<const Sentence>(one)}, 1);
  CHECK(w.id("a") < w.id("b"));
  CHECK(w.id("zzz") == kUnkId);
}

TEST_CASE("sentence encoding round-trips") {
  const Vocabulary v = Vocabulary::from_tokens({"<s>", "</s>", "<unk>", "a", "b"});
  const Sentence s{"b", "a", "b"};
  const auto ids = encode_target(v, s);
  CHECK(ids == std::vector<TokenId>{4, 3, 4, kEndId});
  CHECK(v.decode(strip_markers(ids)) == s);
  CHECK(encode_sentence(v, {"a", "q"}) == std::vector<TokenId>{3, kUnkId});
  CHECK_THROWS(Vocabulary::from_tokens({"a", "</s>", "<unk>"}));
}

TEST_CASE("unk replacement") {
  const std::vector<std::string> src{"x", "y", "z"};
  const std::vector<std::string> tgt{"a", "<unk>"};
  const std::vector<std::vector<double>> att{{1.0, 0.0, 0.0}, {0.1, 0.7, 0.2}};
  CHECK(unk_replace(tgt, att, src) == std::vector<std::string>{"a", "y"});
  const std::vector<std::vector<double>> tie{{1.0, 0.0, 0.0}, {0.4, 0.2, 0.4}};
  CHECK(unk_replace(tgt, tie, src) == std::vector<std::string>{"a", "x"});
  const std::vector<std::string> plain{"a", "b"};
  CHECK(unk_replace(plain, att, src) == plain);
  CHECK_THROWS_AS(unk_replace(tgt, {{1.0, 0.0, 0.0}}, src), ContractError);
}

TEST_CASE("checkpoint round-trip") {
  for (bool with_opt : {false, true}) {
    const Checkpoint c = sample_checkpoint(with_opt);
    const auto bytes = serialize_checkpoint(c);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "BNSQ");
    const Checkpoint back = deserialize_checkpoint(bytes);
    CHECK(back.vocab == c.vocab);
    CHECK(back.params == c.params);
    CHECK(back.metadata == c.metadata);
    CHECK(back.optimizer.has_value() == with_opt);
    CHECK(serialize_checkpoint(back) == bytes);
  }
}

TEST_CASE("corrupted checkpoints are rejected") {
  const auto bytes = serialize_checkpoint(sample_checkpoint(true));
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK_THROWS_AS(deserialize_checkpoint(truncated), FormatError);
  }
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(magic), FormatError);
  auto version = bytes;
  version[4] = 99;
  CHECK_THROWS_AS(deserialize_checkpoint(version), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize_checkpoint(trailing), FormatError);
}

TEST_CASE("config text") {
  ExperimentConfig c;
  apply_config_text(c, "# comment\nseed = 17   # trailing\n\nmax_len=9\n");
  CHECK(c.seed == 17);
  CHECK(c.max_len == 9);
  CHECK_THROWS_AS(apply_config_text(c, "no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "seed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "seed 1\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "seed = abc\n"), ConfigError);
  set_config_value(c, "objective", "pr");
  CHECK(c.bandit.objective == Objective::Pr);
  CHECK_THROWS_AS(set_config_value(c, "cv_mode", "bogus"), ConfigError);

  ExperimentConfig again;
  apply_config_text(again, config_to_text(c));
  CHECK(config_to_text(again) == config_to_text(c));
  CHECK(again.hash() == c.hash());
  again.seed += 1;
  CHECK(again.hash() != c.hash());
}

TEST_CASE("metrics CSV") {
  std::ostringstream out;
  write_metrics_header(out);
  write_metric_row(out, {"el-0", 100, 0, "b-valid", "ggleu", 0.25});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "run,iteration,epoch,split,metric,value");
  CHECK(row.rfind("el-0,100,0,b-valid,ggleu,0.25", 0) == 0);
}

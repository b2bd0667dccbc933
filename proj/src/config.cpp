#include "bandit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string bad(std::string_view key, std::string_view value, std::string_view expected) {
  return "invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
         std::string(expected) + ")";
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(bad(key, v, "a non-negative integer"));
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(bad(key, v, "a number"));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(bad(key, v, "true or false"));
}

std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SIZE_KEY(name, field)                                                               \
  Key{name, [](ExperimentConfig& c, std::string_view v) { c.field = to_u64(name, v); },    \
      [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define REAL_KEY(name, field)                                                               \
  Key{name, [](ExperimentConfig& c, std::string_view v) { c.field = to_double(name, v); }, \
      [](const ExperimentConfig& c) { return fmt(c.field); }}
#define BOOL_KEY(name, field)                                                               \
  Key{name, [](ExperimentConfig& c, std::string_view v) { c.field = to_bool(name, v); },   \
      [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }}
#define TEXT_KEY(name, field)                                                               \
  Key{name, [](ExperimentConfig& c, std::string_view v) { c.field = std::string(v); },     \
      [](const ExperimentConfig& c) { return c.field; }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      SIZE_KEY("seed", seed),
      SIZE_KEY("runs", runs),
      SIZE_KEY("embedding_size", embedding_size),
      SIZE_KEY("hidden_size", hidden_size),
      REAL_KEY("init_scale", init_scale),
      SIZE_KEY("vocab_cutoff", vocab_cutoff),
      SIZE_KEY("max_len", max_len),
      TEXT_KEY("data_dir", data_dir),
      TEXT_KEY("init_checkpoint", init_checkpoint),
      BOOL_KEY("stage_pretrain", stage_pretrain),
      BOOL_KEY("stage_adapt", stage_adapt),
      SIZE_KEY("lexicon_size", synthetic.lexicon_size),
      REAL_KEY("overlap", synthetic.overlap),
      REAL_KEY("domain_skew", synthetic.domain_skew),
      BOOL_KEY("reorder_a", synthetic.reorder_a),
      BOOL_KEY("reorder_b", synthetic.reorder_b),
      SIZE_KEY("min_sentence_length", synthetic.min_length),
      SIZE_KEY("max_sentence_length", synthetic.max_length),
      SIZE_KEY("a_train_size", synthetic.a_train),
      SIZE_KEY("a_valid_size", synthetic.a_valid),
      SIZE_KEY("a_test_size", synthetic.a_test),
      SIZE_KEY("b_train_size", synthetic.b_train),
      SIZE_KEY("b_valid_size", synthetic.b_valid),
      SIZE_KEY("b_test_size", synthetic.b_test),
      SIZE_KEY("mle_epochs", mle.epochs),
      SIZE_KEY("mle_batch_size", mle.batch_size),
      REAL_KEY("mle_alpha", mle.adam.alpha),
      SIZE_KEY("mle_patience", mle.patience),
      SIZE_KEY("mle_valid_interval", mle.valid_interval),
      REAL_KEY("mle_stop_at", mle.stop_at),
      REAL_KEY("mle_clip_norm", mle.clip_norm),
      REAL_KEY("dropout", mle.dropout),
      REAL_KEY("clip_norm", bandit.clip_norm),
      REAL_KEY("adam_alpha", bandit.adam.alpha),
      REAL_KEY("adam_beta1", bandit.adam.beta1),
      REAL_KEY("adam_beta2", bandit.adam.beta2),
      REAL_KEY("adam_eps", bandit.adam.eps),
      Key{"objective",
          [](ExperimentConfig& c, std::string_view v) { c.bandit.objective = parse_objective(v); },
          [](const ExperimentConfig& c) { return std::string(to_string(c.bandit.objective)); }},
      Key{"cv_mode",
          [](ExperimentConfig& c, std::string_view v) { c.bandit.cv_mode = parse_cv_mode(v); },
          [](const ExperimentConfig& c) { return std::string(to_string(c.bandit.cv_mode)); }},
      Key{"pair_feedback",
          [](ExperimentConfig& c, std::string_view v) {
            c.bandit.pair_feedback = parse_pair_feedback(v);
          },
          [](const ExperimentConfig& c) { return std::string(to_string(c.bandit.pair_feedback)); }},
      BOOL_KEY("baseline_includes_current", bandit.baseline_includes_current),
      SIZE_KEY("iters", bandit.iterations),
      SIZE_KEY("valid_interval", bandit.valid_interval),
      Key{"optimizer",
          [](ExperimentConfig& c, std::string_view v) {
            if (v == "adam") c.bandit.optimizer = OptimizerKind::Adam;
            else if (v == "sgd") c.bandit.optimizer = OptimizerKind::Sgd;
            else throw ConfigError(bad("optimizer", v, "adam or sgd"));
          },
          [](const ExperimentConfig& c) {
            return std::string(c.bandit.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
          }},
      REAL_KEY("sgd_rate", bandit.sgd_rate),
      REAL_KEY("sgd_decay", bandit.sgd_decay),
  };
  return table;
}

#undef SIZE_KEY
#undef REAL_KEY
#undef BOOL_KEY
#undef TEXT_KEY

}  // namespace

Objective parse_objective(std::string_view s) {
  if (s == "el") return Objective::El;
  if (s == "pr") return Objective::Pr;
  if (s == "mle") return Objective::Mle;
  throw ConfigError(bad("objective", s, "el, pr or mle"));
}

CvMode parse_cv_mode(std::string_view s) {
  if (s == "none") return CvMode::None;
  if (s == "baseline") return CvMode::Baseline;
  if (s == "sf") return CvMode::ScoreFunction;
  throw ConfigError(bad("cv_mode", s, "none, baseline or sf"));
}

PairFeedbackKind parse_pair_feedback(std::string_view s) {
  if (s == "bin") return PairFeedbackKind::Binary;
  if (s == "cont") return PairFeedbackKind::Continuous;
  throw ConfigError(bad("pair_feedback", s, "bin or cont"));
}

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::Mle: return "mle";
    case Objective::El: return "el";
    case Objective::Pr: return "pr";
  }
  return "?";
}

std::string_view to_string(CvMode m) {
  switch (m) {
    case CvMode::None: return "none";
    case CvMode::Baseline: return "baseline";
    case CvMode::ScoreFunction: return "sf";
  }
  return "?";
}

std::string_view to_string(PairFeedbackKind k) {
  return k == PairFeedbackKind::Binary ? "bin" : "cont";
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::set<std::string, std::less<>> seen;
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c;
  apply_config_text(c, buf.str(), path.string());
  return c;
}

std::string config_to_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.emplace_back(k.name);
  return out;
}

}  // namespace bandit

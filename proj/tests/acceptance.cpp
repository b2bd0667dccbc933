// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bandit/checkpoint.hpp"
#include "bandit/config.hpp"
#include "bandit/control_variates.hpp"
#include "bandit/decode.hpp"
#include "bandit/enumeration.hpp"
#include "bandit/errors.hpp"
#include "bandit/experiment.hpp"
#include "bandit/gradcheck.hpp"
#include "bandit/metrics.hpp"
#include "bandit/objectives.hpp"

#ifndef BANDIT_CONFIG_DIR
#define BANDIT_CONFIG_DIR "configs"
#endif

using namespace bandit;
namespace fs = std::filesystem;

namespace {

using Seq = std::vector<TokenId>;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double relative_distance(const GradientMap& a, const GradientMap& b) {
  GradientMap d = a;
  d.axpy(-1.0, b);
  const double denom = b.norm();
  return denom > 0.0 ? d.norm() / denom : d.norm();
}

double max_abs(const GradientMap& g) {
  double m = 0.0;
  for (const auto& t : g)
    for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

double dot(const GradientMap& a, const GradientMap& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].values(), y = b[i].values();
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  }
  return s;
}

Seq random_seq(Rng& rng, std::size_t len, std::size_t vocab) {
  Seq out(len);
  for (auto& t : out) t = static_cast<TokenId>(rng.below(vocab));
  return out;
}

ModelParams tiny(std::uint64_t seed, std::size_t vocab = 3, double scale = 0.8) {
  return ModelParams::random({vocab, 4, 4}, seed, scale);
}

// --- 1 ---------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams p = tiny(1000 + seed, 3, 0.5);
    Rng rng(seed);
    const Seq src = random_seq(rng, 1 + rng.below(4), 3);
    Seq tgt = random_seq(rng, 1 + rng.below(3), 3);
    tgt.push_back(kEndId);
    const auto log_prob = model_finite_difference_check(
        [&](ModelGraph& m) { return m.sequence_log_prob(m.encode(src), tgt); }, p, 1e-5, 1e-4);
    const auto nll = model_finite_difference_check(
        [&](ModelGraph& m) { return m.graph().neg(m.sequence_log_prob(m.encode(src), tgt)); }, p,
        1e-5, 1e-4);
    // the MLE routine itself must return the gradient that was just checked
    const MleResult mle = mle_loss_and_grad(src, tgt, p);
    Graph g;
    ModelGraph m(g, p);
    const Var v = g.neg(m.sequence_log_prob(m.encode(src), tgt));
    ok = ok && log_prob.passed && nll.passed &&
         relative_distance(mle.estimate.gradient, g.gradients(v, p.tensors())) < 1e-12;
    worst = std::max({worst, log_prob.max_relative_error, nll.max_relative_error});
  }
  const double t = seconds_since(start);
  return {ok && worst < 1e-4 && t < 60.0,
          "max rel err " + fmt(worst, 3) + " over 20 models, " + fmt(t, 3) + " s"};
}

// --- 2 and 3 -----------------------------------------------------------------

Outcome el_unbiasedness() {
  const auto start = Clock::now();
  double worst = 0.0;
  const auto sequences = enumerate_sequences(3, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams p = tiny(2000 + seed, 3, 1.0);
    Rng rng(seed + 50);
    const Seq src = random_seq(rng, 1 + rng.below(3), 3);
    std::map<Seq, double> table;
    for (const auto& y : sequences) table[y] = -rng.uniform();
    const auto delta = [&](std::span<const TokenId> y) { return table.at(Seq(y.begin(), y.end())); };
    const ExactRisk exact = exact_risk_and_grad(src, p, delta, 2);
    GradientMap expectation = p.tensors().zeros_like();
    for (const auto& y : sequences) {
      const ScoredSample s = score_sample(src, y, p);
      expectation.axpy(std::exp(s.log_prob), el_gradient(s.score, table.at(y)).gradient);
    }
    worst = std::max(worst, relative_distance(expectation, exact.gradient));
  }
  const double t = seconds_since(start);
  return {worst < 1e-5 && t < 60.0, "max rel err " + fmt(worst, 3) + ", " + fmt(t, 3) + " s"};
}

Outcome score_zero_mean() {
  double worst = 0.0;
  const auto sequences = enumerate_sequences(3, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams p = tiny(2000 + seed, 3, 1.0);
    Rng rng(seed + 50);
    const Seq src = random_seq(rng, 1 + rng.below(3), 3);
    GradientMap mean = p.tensors().zeros_like();
    for (const auto& y : sequences) {
      const ScoredSample s = score_sample(src, y, p);
      mean.axpy(std::exp(s.log_prob), s.score);
    }
    worst = std::max(worst, max_abs(mean));
  }
  return {worst < 1e-6, "max |E[score]| " + fmt(worst, 3)};
}

// --- 4 -----------------------------------------------------------------------

Outcome pr_unbiasedness() {
  const auto start = Clock::now();
  const std::size_t T = 2;
  const auto sequences = enumerate_sequences(3, T);
  double worst = 0.0, worst_mass = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams p = tiny(3000 + seed, 3, 1.0);
    Rng rng(seed + 70);
    const Seq src = random_seq(rng, 1 + rng.below(3), 3);
    std::map<std::pair<Seq, Seq>, double> table;
    for (const auto& a : sequences)
      for (const auto& b : sequences) table[{a, b}] = 2.0 * rng.uniform() - 1.0;
    const auto delta = [&](std::span<const TokenId> a, std::span<const TokenId> b) {
      return table.at({Seq(a.begin(), a.end()), Seq(b.begin(), b.end())});
    };
    const ExactRisk exact = exact_pair_risk_and_grad(src, p, delta, T);
    const Seq prefix = greedy_prefix(src, p, T);
    GradientMap expectation = p.tensors().zeros_like();
    double mass = 0.0;
    for (std::size_t i = 1; i <= T; ++i)
      for (const auto& a : sequences)
        for (const auto& b : sequences) {
          SampledPair pair;
          pair.positive = a;
          pair.perturbed = b;
          pair.position = i;
          pair.greedy.assign(prefix.begin(),
                             prefix.begin() + static_cast<std::ptrdiff_t>(std::max(a.size(), b.size())));
          pair.log_prob = pair_log_prob(src, pair, p);
          const double prob = std::exp(pair.log_prob) / static_cast<double>(T);
          mass += prob;
          expectation.axpy(prob, pr_gradient(src, pair, table.at({a, b}), p).gradient);
        }
    worst = std::max(worst, relative_distance(expectation, exact.gradient));
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  const double t = seconds_since(start);
  return {worst < 1e-5 && worst_mass < 1e-9 && t < 120.0,
          "max rel err " + fmt(worst, 3) + ", outcome mass error " + fmt(worst_mass, 3) + ", " +
              fmt(t, 3) + " s"};
}

// --- 5 -----------------------------------------------------------------------

Outcome sampling_fidelity() {
  const ModelParams p = tiny(4000, 3, 1.5);
  const Seq src{2, 1};
  const std::size_t draws = 100000;
  std::map<Seq, std::size_t> counts;
  Rng rng(5);
  for (std::size_t i = 0; i < draws; ++i) ++counts[sample_structure(src, p, 2, rng).tokens];
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& y : enumerate_sequences(3, 2)) {
    const double prob = std::exp(sequence_log_prob(src, y, p));
    if (prob <= 1e-3) continue;
    const double freq = static_cast<double>(counts[y]) / static_cast<double>(draws);
    const double se = std::sqrt(prob * (1.0 - prob) / static_cast<double>(draws));
    worst = std::max(worst, std::abs(freq - prob) / se);
    ++checked;
  }
  return {worst < 3.0, fmt(checked) + " sequences, max deviation " + fmt(worst, 3) + " SE"};
}

// --- 6 -----------------------------------------------------------------------

Outcome rank_reversal() {
  Rng rng(6);
  std::size_t reversed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor o({2 + rng.below(15)});
    std::set<double> seen;
    for (double& v : o.values()) {
      do v = 5.0 * rng.normal();
      while (!seen.insert(v).second);
    }
    const Tensor pos = output_distribution(o, OutputMode::Positive);
    const Tensor neg = output_distribution(o, OutputMode::Negative);
    std::vector<std::size_t> a(o.size()), b(o.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = b[i] = i;
    std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) { return pos[i] > pos[j]; });
    std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return neg[i] < neg[j]; });
    reversed += a == b;
  }
  return {reversed == 1000, fmt(reversed) + "/1000 orderings reversed"};
}

// --- 7 -----------------------------------------------------------------------

double total(const GradientMap& g) {
  double s = 0.0;
  for (const auto& t : g)
    for (double v : t.values()) s += v;
  return s;
}

Outcome variance_reduction() {
  const ModelParams p = tiny(7000, 4, 1.0);
  const Seq src{3, 2};
  const std::size_t max_len = 3;
  std::map<Seq, double> table;
  Rng table_rng(71);
  double lo = 0.0, hi = -1.0;
  for (const auto& y : enumerate_sequences(4, max_len)) {
    table[y] = -table_rng.uniform();
    lo = std::min(lo, table[y]);
    hi = std::max(hi, table[y]);
  }
  for (auto& [y, d] : table) d = -1.0 + (d - lo) / (hi - lo);  // spans [-1, 0] exactly

  const std::size_t draws = 10000;
  struct Draw {
    GradientMap estimate, score;
    double delta;
  };
  auto draw = [&](Rng& rng) {
    const SampledSequence s = sample_structure(src, p, max_len, rng);
    const ScoredSample scored = score_sample(src, s.tokens, p);
    const double delta = table.at(s.tokens);
    return Draw{el_gradient(scored.score, delta).gradient, scored.score, delta};
  };

  Rng rng(72);
  EntrywiseCovariance plain, baseline;
  ControlVariateState bl(CvMode::Baseline);
  for (std::size_t k = 0; k < draws; ++k) {
    const Draw d = draw(rng);
    plain.observe(d.estimate, d.estimate);
    const GradientEstimate adjusted =
        bl.apply(GradientEstimate{d.estimate, d.delta, Provenance::El}, d.score);
    baseline.observe(adjusted.gradient, adjusted.gradient);
  }
  const double var_plain = total(plain.covariance());
  const double var_bl = total(baseline.covariance());

  EntrywiseCovariance fit;
  for (std::size_t k = 0; k < draws; ++k) {
    const Draw d = draw(rng);
    fit.observe(d.estimate, d.score);
  }
  const GradientMap c_hat = fit.regression_coefficients();
  EntrywiseCovariance raw, reduced, cross, score_var;
  for (std::size_t k = 0; k < draws; ++k) {
    const Draw d = draw(rng);
    const GradientMap adjusted = subtract_scaled(d.estimate, c_hat, d.score);
    raw.observe(d.estimate, d.estimate);
    reduced.observe(adjusted, adjusted);
    cross.observe(d.estimate, d.score);
    score_var.observe(d.score, d.score);
  }
  const GradientMap vr = raw.covariance(), va = reduced.covariance(), cxy = cross.covariance(),
                    vy = score_var.covariance();
  std::size_t eligible = 0, improved = 0;
  for (std::size_t s = 0; s < vr.size(); ++s)
    for (std::size_t i = 0; i < vr[s].size(); ++i) {
      const double denom = std::sqrt(vr[s][i] * vy[s][i]);
      if (!(denom > 0.0) || std::abs(cxy[s][i] / denom) <= 0.1) continue;
      ++eligible;
      improved += va[s][i] < vr[s][i];
    }
  const double fraction = eligible ? static_cast<double>(improved) / static_cast<double>(eligible) : 0.0;
  return {var_bl < var_plain && eligible > 0 && fraction >= 0.9,
          "total variance plain " + fmt(var_plain) + " baseline " + fmt(var_bl) +
              "; frozen c-hat reduces " + fmt(improved) + "/" + fmt(eligible) + " correlated entries"};
}

// --- 8 -----------------------------------------------------------------------

Outcome antithetic_identity() {
  const ModelParams p = tiny(8000, 5, 1.0);
  const Seq src{3, 4, 2};
  Rng rng(8), dir_rng(81);
  GradientMap direction = p.tensors().zeros_like();
  for (auto& t : direction)
    for (double& v : t.values()) v = dir_rng.normal();
  FeedbackOracle oracle({{3, 4, 4}});
  std::vector<double> x1, x2;
  for (int k = 0; k < 5000; ++k) {
    const SampledPair pair = sample_pair(src, p, 4, rng);
    const ScoredPair scored = score_pair(src, pair, p);
    const double delta = oracle.pair(0, pair, PairFeedbackKind::Continuous);
    x1.push_back(delta * dot(direction, scored.positive));
    x2.push_back(delta * dot(direction, scored.perturbed));
  }
  const AntitheticSummary s = antithetic_summary(x1, x2);
  const double gap = std::abs(s.estimator_variance - s.identity_variance);
  std::vector<double> neg(x1.size());
  std::transform(x1.begin(), x1.end(), neg.begin(), [](double v) { return -v; });
  const AntitheticSummary mirrored = antithetic_summary(x1, neg);
  return {gap <= 1e-10 * std::max(1.0, s.identity_variance) && mirrored.estimator_variance < 1e-20,
          "Var((X1+X2)/2) " + fmt(s.estimator_variance, 6) + " vs identity " +
              fmt(s.identity_variance, 6) + " (cov " + fmt(s.covariance, 3) + "); X2 = -X1 gives " +
              fmt(mirrored.estimator_variance, 3)};
}

// --- 9 -----------------------------------------------------------------------

std::size_t occurrences(const Seq& s, const Seq& gram) {
  std::size_t c = 0;
  for (std::size_t i = 0; i + gram.size() <= s.size(); ++i)
    c += std::equal(gram.begin(), gram.end(), s.begin() + static_cast<std::ptrdiff_t>(i));
  return c;
}

double brute_ggleu(const Seq& h, const Seq& r) {
  double matches = 0, hyp = 0, ref = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (h.size() >= n) hyp += static_cast<double>(h.size() - n + 1);
    if (r.size() >= n) ref += static_cast<double>(r.size() - n + 1);
    std::set<Seq> grams;
    for (std::size_t i = 0; i + n <= h.size(); ++i)
      grams.insert(Seq(h.begin() + static_cast<std::ptrdiff_t>(i),
                       h.begin() + static_cast<std::ptrdiff_t>(i + n)));
    for (const auto& g : grams) matches += static_cast<double>(std::min(occurrences(h, g), occurrences(r, g)));
  }
  if (hyp == 0 || ref == 0) return 0.0;
  return std::min(matches / hyp, matches / ref);
}

Outcome ggleu_oracle() {
  const double example = ggleu(Seq{3, 4, 5}, Seq{3, 4, 6});
  Rng rng(9);
  std::size_t exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Seq h = random_seq(rng, rng.below(10), 5);
    const Seq r = random_seq(rng, 1 + rng.below(9), 5);
    exact += ggleu(h, r) == brute_ggleu(h, r);
  }
  return {example == 0.5 && exact == 1000,
          "example " + fmt(example) + ", " + fmt(exact) + "/1000 random cases identical"};
}

// --- 10 and 11 ---------------------------------------------------------------

struct Desk {
  ExperimentConfig config;
  PreparedData data;
  ModelParams seed_model;
  TestScores seed_scores;
  double pretrain_seconds = 0.0;
};

struct BanditRun {
  TestScores scores;
  std::size_t threshold_iteration = 0;  // 0: never reached
  bool calls_match = false;
  double seconds = 0.0;
};

BanditRun run_bandit(const Desk& desk, TrainingConfig bandit, std::size_t run) {
  const auto start = Clock::now();
  bandit.seed = bandit_run_seed(desk.config, run);
  const AdaptOutcome out = adapt(bandit, desk.data, desk.seed_model, desk.config.max_len);
  BanditRun r;
  r.scores = test_scores(out.train.best_params, desk.data, desk.config.max_len);
  const double target = out.train.validation_curve.front().second.ggleu + 0.05;
  for (const auto& [iteration, e] : out.train.validation_curve)
    if (e.ggleu >= target) {
      r.threshold_iteration = iteration;
      break;
    }
  r.calls_match = out.oracle_calls == out.train.updates;
  r.seconds = seconds_since(start);
  return r;
}

std::string describe(const char* name, const BanditRun& r, const TestScores& seed) {
  return std::string(name) + " B " + fmt(r.scores.b.ggleu, 3) + " (" +
         (r.scores.b.ggleu >= seed.b.ggleu ? "+" : "") + fmt(r.scores.b.ggleu - seed.b.ggleu, 3) +
         ") A " + fmt(r.scores.a.ggleu, 3) + " thr@" +
         (r.threshold_iteration ? fmt(static_cast<double>(r.threshold_iteration), 6) : "never");
}

Outcome desk_el(Desk& desk) {
  const auto start = Clock::now();
  desk.config = load_config(fs::path(BANDIT_CONFIG_DIR) / "desk.conf");
  desk.data = prepare_data(desk.config);
  TrainResult mle = pretrain(desk.config, desk.data);
  desk.seed_model = std::move(mle.best_params);
  desk.seed_scores = test_scores(desk.seed_model, desk.data, desk.config.max_len);
  desk.pretrain_seconds = seconds_since(start);
  const TestScores& seed = desk.seed_scores;
  std::ostringstream detail;
  detail << "seed A " << fmt(seed.a.ggleu, 3) << " B " << fmt(seed.b.ggleu, 3);
  bool ok = seed.a.ggleu >= 0.95 && seed.b.ggleu <= 0.75;

  TrainingConfig el = desk.config.bandit;
  el.objective = Objective::El;
  el.cv_mode = CvMode::None;
  TrainingConfig bl = el;
  bl.cv_mode = CvMode::Baseline;
  bool calls = true;
  for (std::size_t r = 0; r < desk.config.runs; ++r) {
    el.run = "el" + std::to_string(r);
    bl.run = "bl" + std::to_string(r);
    const BanditRun a = run_bandit(desk, el, r);
    const BanditRun b = run_bandit(desk, bl, r);
    const double gain = a.scores.b.ggleu - seed.b.ggleu;
    const double loss_a = seed.a.ggleu - a.scores.a.ggleu;
    ok = ok && gain >= 0.05 && loss_a < gain;
    ok = ok && b.threshold_iteration != 0 &&
         (a.threshold_iteration == 0 || b.threshold_iteration <= a.threshold_iteration) &&
         b.scores.b.ggleu >= a.scores.b.ggleu - 0.01;
    calls = calls && a.calls_match && b.calls_match;
    detail << "; run " << r << ": " << describe("EL", a, seed) << ", " << describe("BL", b, seed);
  }
  const double t = seconds_since(start);
  ok = ok && calls && t < 20.0 * 60.0;
  detail << "; oracle calls " << (calls ? "==" : "!=") << " updates; " << fmt(t, 4) << " s";
  return {ok, detail.str()};
}

Outcome desk_pr(const Desk& desk) {
  const auto start = Clock::now();
  const TestScores& seed = desk.seed_scores;
  std::ostringstream detail;
  detail << "seed B " << fmt(seed.b.ggleu, 3);
  bool ok = true;
  for (PairFeedbackKind kind : {PairFeedbackKind::Binary, PairFeedbackKind::Continuous}) {
    TrainingConfig pr = desk.config.bandit;
    pr.objective = Objective::Pr;
    pr.cv_mode = CvMode::None;
    pr.pair_feedback = kind;
    pr.adam.alpha = 1e-5;
    for (std::size_t r = 0; r < desk.config.runs; ++r) {
      pr.run = std::string(to_string(kind)) + std::to_string(r);
      const BanditRun run = run_bandit(desk, pr, r);
      ok = ok && run.scores.b.ggleu - seed.b.ggleu >= 0.02 && run.calls_match;
      detail << "; " << describe(pr.run.c_str(), run, seed);
    }
  }
  detail << "; " << fmt(seconds_since(start), 4) << " s";
  return {ok, detail.str()};
}

// --- 12 ----------------------------------------------------------------------

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool rejected(const fs::path& p) {
  try {
    load_checkpoint(p);
  } catch (const FormatError&) {
    return true;
  }
  return false;
}

Outcome determinism_and_formats() {
  const fs::path root = fs::temp_directory_path() / "banditnmt-acceptance";
  fs::remove_all(root);
  const ExperimentConfig config = load_config(fs::path(BANDIT_CONFIG_DIR) / "smoke.conf");
  std::ostringstream sink;
  auto* previous = std::cout.rdbuf(sink.rdbuf());
  run_pipeline(config, root / "first");
  run_pipeline(config, root / "second");
  std::cout.rdbuf(previous);

  const auto csv = read_bytes(root / "first" / "metrics.csv");
  const bool same_csv = !csv.empty() && csv == read_bytes(root / "second" / "metrics.csv");

  bool round_trip = true;
  for (const char* name : {"mle.ckpt", "run0.ckpt"}) {
    const auto bytes = read_bytes(root / "first" / name);
    const Checkpoint c = load_checkpoint(root / "first" / name);
    round_trip = round_trip && serialize_checkpoint(c) == bytes &&
                 bytes == read_bytes(root / "second" / name);
  }

  const auto bytes = read_bytes(root / "first" / "run0.ckpt");
  const Checkpoint original = deserialize_checkpoint(bytes);
  // offset of the first tensor's rank field
  std::size_t rank_at = 8 + 4;
  for (const auto& t : original.vocab.tokens()) rank_at += 4 + t.size();
  rank_at += 4 + 4 + original.params.tensors().name(0).size();

  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> corrupt;
  auto magic = bytes;
  magic[1] = 'X';
  corrupt.emplace_back("magic", magic);
  auto version = bytes;
  version[4] = 7;
  corrupt.emplace_back("version", version);
  auto rank = bytes;
  rank[rank_at] = 9;
  corrupt.emplace_back("rank", rank);
  auto dim = bytes;
  dim[rank_at + 4] += 1;
  corrupt.emplace_back("shape", dim);
  corrupt.emplace_back("truncated", std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 9));
  std::size_t caught = 0;
  for (const auto& [name, b] : corrupt) {
    const fs::path p = root / ("corrupt-" + name + ".ckpt");
    write_bytes(p, b);
    caught += rejected(p);
  }
  fs::remove_all(root);
  return {same_csv && round_trip && caught == corrupt.size(),
          std::string("metrics CSV ") + (same_csv ? "identical" : "differs") + ", checkpoint round-trip " +
              (round_trip ? "bit-exact" : "differs") + ", " + fmt(caught) + "/" + fmt(corrupt.size()) +
              " corrupted checkpoints rejected"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("criteria", only, "criterion numbers to run (default: all)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  const auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  Desk desk;
  bool desk_ready = false;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_correctness},
      {2, el_unbiasedness},
      {3, score_zero_mean},
      {4, pr_unbiasedness},
      {5, sampling_fidelity},
      {6, rank_reversal},
      {7, variance_reduction},
      {8, antithetic_identity},
      {9, ggleu_oracle},
      {10, [&] {
         desk_ready = true;
         return desk_el(desk);
       }},
      {11, [&] {
         if (!desk_ready) {
           desk.config = load_config(fs::path(BANDIT_CONFIG_DIR) / "desk.conf");
           desk.data = prepare_data(desk.config);
           desk.seed_model = pretrain(desk.config, desk.data).best_params;
           desk.seed_scores = test_scores(desk.seed_model, desk.data, desk.config.max_len);
         }
         return desk_pr(desk);
       }},
      {12, determinism_and_formats},
  };

  int failed = 0;
  for (const auto& [n, run] : criteria) {
    if (!wanted(n)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

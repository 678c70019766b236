#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pivot/advantage.hpp"
#include "pivot/errors.hpp"
#include "pivot/metrics.hpp"
#include "pivot/reward.hpp"
#include "pivot/rng.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

// Synthetic translate-then-reason task: arithmetic word problems whose source
// side is enciphered by a bijective word map, so "translation" is exact
// decipherment with a known English reference.
struct CipherTask {
  std::vector<std::string> english_vocab;
  std::vector<std::string> cipher_vocab;  // bijection by index
  int difficulty = 9;                     // numeric slots drawn from [1, difficulty]

  // Deterministic pseudoword cipher over the fixed task lexicon.
  static CipherTask standard(uint64_t seed = 17, int difficulty = 9);

  std::string encode_word(const std::string& w) const {
    for (size_t i = 0; i < english_vocab.size(); ++i)
      if (english_vocab[i] == w) return cipher_vocab[i];
    return w;  // digits and unknown words pass through
  }

  std::string decode_word(const std::string& w) const {
    for (size_t i = 0; i < cipher_vocab.size(); ++i)
      if (cipher_vocab[i] == w) return english_vocab[i];
    return w;
  }

  std::string encode_text(const std::string& text) const;
  std::string decode_text(const std::string& text) const;
};

// Generative rollout knobs. Correctness follows the linear-clamped law
// P(correct | metric score s) = clamp(base + gain * s, 0, 1), a monotone link
// between translation quality and answer accuracy.
struct RolloutKnobs {
  double noise_rate = 0.0;        // per-word corruption probability
  double correctness_base = 0.1;  // intercept of the correctness law
  double correctness_gain = 0.8;  // slope of the correctness law
  double format_break_rate = 0.0; // probability the close tag is dropped
  uint64_t seed = 0;

  double correctness_probability(double score) const {
    const double p = correctness_base + correctness_gain * score;
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  }
};

namespace detail {

inline const std::array<const char*, 8> kNoiseLexicon = {
    "zorp", "flib", "quux", "blarg", "snee", "wug", "vark", "gron"};

struct ProblemTemplate {
  const char* pattern;  // words with {a} {b} {c} slots
  int slots;
  long long (*eval)(long long a, long long b, long long c);
};

inline const std::array<ProblemTemplate, 5> kTemplates = {{
    {"what is {a} plus {b} ?", 2,
     [](long long a, long long b, long long) { return a + b; }},
    {"take {a} groups of {b} items each . how many items in total ?", 2,
     [](long long a, long long b, long long) { return a * b; }},
    {"what is {a} times {b} minus {c} ?", 3,
     [](long long a, long long b, long long c) { return a * b - c; }},
    {"start with {a} items , then remove {b} . what remains ?", 2,
     [](long long a, long long b, long long) { return a - b; }},
    {"add {a} and {b} and {c} together . what is the sum ?", 3,
     [](long long a, long long b, long long c) { return a + b + c; }},
}};

inline std::string instantiate(const char* pattern, long long a, long long b,
                               long long c) {
  std::string out;
  for (const char* p = pattern; *p; ++p) {
    if (*p == '{' && p[1] && p[2] == '}') {
      const long long v = p[1] == 'a' ? a : (p[1] == 'b' ? b : c);
      out += std::to_string(v);
      p += 2;
    } else {
      out.push_back(*p);
    }
  }
  return out;
}

inline std::string pseudoword(Rng& rng) {
  static const char* consonants = "bcdfghjklmnpqrstvz";
  static const char* vowels = "aeiou";
  std::string w;
  const int syllables = 2 + rng.index(2);
  for (int s = 0; s < syllables; ++s) {
    w.push_back(consonants[rng.index(18)]);
    w.push_back(vowels[rng.index(5)]);
  }
  return w;
}

}  // namespace detail

inline CipherTask CipherTask::standard(uint64_t seed, int difficulty) {
  CipherTask task;
  task.difficulty = difficulty;
  // Every word appearing in any template, plus the answer-section words used
  // by rollout renderers.
  task.english_vocab = {
      "what", "is",    "plus",   "take",  "groups", "of",     "items",
      "each", "how",   "many",   "in",    "total",  "times",  "minus",
      "start", "with", "then",   "remove", "remains", "add",  "and",
      "together", "the", "sum",  "?",     ".",      ","};
  Rng rng(mix_seed(seed, 0x5EEDu));
  std::map<std::string, bool> used;
  for (const auto& w : task.english_vocab) used[w] = true;
  task.cipher_vocab.reserve(task.english_vocab.size());
  for (const auto& w : task.english_vocab) {
    if (w.size() == 1 && is_ascii_punct(static_cast<unsigned char>(w[0]))) {
      task.cipher_vocab.push_back(w);  // punctuation maps to itself
      continue;
    }
    std::string c = detail::pseudoword(rng);
    while (used.count(c)) c = detail::pseudoword(rng);
    used[c] = true;
    task.cipher_vocab.push_back(c);
  }
  return task;
}

inline std::string CipherTask::encode_text(const std::string& text) const {
  std::string out;
  for (const auto& w : split_whitespace(text)) {
    if (!out.empty()) out += ' ';
    out += encode_word(w);
  }
  return out;
}

inline std::string CipherTask::decode_text(const std::string& text) const {
  std::string out;
  for (const auto& w : split_whitespace(text)) {
    if (!out.empty()) out += ' ';
    out += decode_word(w);
  }
  return out;
}

// Deterministic corpus: enciphered source, plain-English reference, and the
// exact arithmetic result as the gold answer.
inline std::vector<Problem> generate_problems(const CipherTask& task, int n,
                                              uint64_t seed) {
  if (n < 1) throw InputError("generate_problems: n must be >= 1");
  std::vector<Problem> problems;
  problems.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
    const auto& tpl =
        detail::kTemplates[rng.index(static_cast<int>(detail::kTemplates.size()))];
    long long a = 1 + rng.index(task.difficulty);
    long long b = 1 + rng.index(task.difficulty);
    long long c = 1 + rng.index(task.difficulty);
    if (tpl.pattern == detail::kTemplates[3].pattern && b > a) std::swap(a, b);
    Problem p;
    p.id = "cm-" + std::to_string(seed) + "-" + std::to_string(i);
    p.english_reference = detail::instantiate(tpl.pattern, a, b, c);
    p.source_text = task.encode_text(*p.english_reference);
    p.gold_answer = std::to_string(tpl.eval(a, b, c));
    p.language_tag = "cipher";
    problems.push_back(std::move(p));
  }
  return problems;
}

namespace detail {

// Incremental builder keeping token_texts concatenation equal to text.
struct RolloutBuilder {
  std::string text;
  std::vector<std::string> token_texts;
  std::vector<double> old_logprobs;

  void push(std::string piece, double logprob = 0.0) {
    text += piece;
    token_texts.push_back(std::move(piece));
    old_logprobs.push_back(logprob);
  }

  Trajectory finish(const std::string& problem_id) const {
    Trajectory t;
    t.problem_id = problem_id;
    t.text = text;
    t.tokens.resize(token_texts.size());
    for (size_t i = 0; i < t.tokens.size(); ++i)
      t.tokens[i] = static_cast<int>(i);
    t.old_logprobs = old_logprobs;
    const auto layout = locate_spans(token_texts, text, parse_trajectory(text));
    t.trans_span = layout.trans;
    t.reason_span = layout.reason;
    return t;
  }
};

inline std::string wrong_answer(const std::string& gold) {
  // Gold answers in this environment are integers; off-by-one keeps the
  // wrong answer plausible.
  try {
    return std::to_string(std::stoll(gold) + 1);
  } catch (...) {
    return gold + "0";
  }
}

}  // namespace detail

// Knob-driven rollouts for a problem: the reference translation with per-word
// corruption, then a reasoning sentence ending in a boxed answer whose
// correctness follows the configured probability law. Per-token old_logprobs
// record the generator's own choice probabilities. token_texts_out, when
// given, receives the per-rollout token strings for serialization.
inline std::vector<Trajectory> sample_rollouts(
    const Problem& problem, const RolloutKnobs& knobs, int g,
    const MetricConfig& metric_cfg = {},
    std::vector<std::vector<std::string>>* token_texts_out = nullptr) {
  if (g < 1) throw InputError("sample_rollouts: g must be >= 1");
  if (!problem.english_reference)
    throw MissingReference("sample_rollouts: problem '" + problem.id +
                           "' lacks an english reference");
  Rng rng(mix_seed(knobs.seed, hash_string(problem.id)));
  const auto ref_words = split_whitespace(*problem.english_reference);
  std::vector<Trajectory> rollouts;
  rollouts.reserve(g);
  if (token_texts_out) token_texts_out->clear();
  for (int j = 0; j < g; ++j) {
    detail::RolloutBuilder b;
    const bool break_format = rng.bernoulli(knobs.format_break_rate);
    const double format_lp =
        std::log(break_format ? knobs.format_break_rate
                              : 1.0 - knobs.format_break_rate);
    b.push(std::string(kOpenTag), format_lp);
    std::string translation;
    for (const auto& word : ref_words) {
      const bool corrupt = rng.bernoulli(knobs.noise_rate);
      std::string emitted;
      double lp;
      if (corrupt) {
        const int pick =
            rng.index(static_cast<int>(detail::kNoiseLexicon.size()));
        emitted = detail::kNoiseLexicon[pick];
        lp = std::log(knobs.noise_rate /
                      static_cast<double>(detail::kNoiseLexicon.size()));
      } else {
        emitted = word;
        lp = std::log(1.0 - knobs.noise_rate);
      }
      if (!translation.empty()) translation += ' ';
      translation += emitted;
      b.push(" " + emitted, lp);
    }
    if (!break_format) b.push(" " + std::string(kCloseTag));
    const double score = chrfpp(translation, *problem.english_reference,
                                metric_cfg);
    const double p_correct = knobs.correctness_probability(score);
    const bool correct = rng.bernoulli(p_correct);
    b.push(" The");
    b.push(" answer");
    b.push(" is");
    b.push(" \\boxed{");
    b.push(correct ? problem.gold_answer
                   : detail::wrong_answer(problem.gold_answer),
           std::log(correct ? p_correct : 1.0 - p_correct));
    b.push("}");
    b.push(".");
    rollouts.push_back(b.finish(problem.id));
    if (token_texts_out) token_texts_out->push_back(b.token_texts);
  }
  return rollouts;
}

struct ConflictPoint {
  double fp = 0.0;
  double fn = 0.0;
  double overall = 0.0;
};

struct ConflictSeries {
  std::vector<ConflictPoint> batches;

  ConflictPoint mean() const {
    ConflictPoint m;
    if (batches.empty()) return m;
    for (const auto& p : batches) {
      m.fp += p.fp;
      m.fn += p.fn;
      m.overall += p.overall;
    }
    const double n = static_cast<double>(batches.size());
    m.fp /= n;
    m.fn /= n;
    m.overall /= n;
    return m;
  }
};

// End-to-end conflict tracking: generator rollouts -> rewards -> advantages
// -> conflict labels, with per-batch trajectory-level proportions.
inline ConflictSeries conflict_experiment(const CipherTask& task,
                                          const RolloutKnobs& knobs,
                                          int batches, int groups_per_batch,
                                          int g, const AdvantageConfig& adv_cfg,
                                          const MetricConfig& metric_cfg = {}) {
  if (batches < 1 || groups_per_batch < 1)
    throw InputError("conflict_experiment: batches and groups must be >= 1");
  const auto problems = generate_problems(
      task, batches * groups_per_batch, mix_seed(knobs.seed, 0xC0DEull));
  const MetricFn metric = chrfpp_metric(metric_cfg);
  ConflictSeries series;
  series.batches.reserve(batches);
  for (int b = 0; b < batches; ++b) {
    long long fp = 0, fn = 0, total = 0;
    for (int k = 0; k < groups_per_batch; ++k) {
      const Problem& problem = problems[b * groups_per_batch + k];
      const auto rollouts = sample_rollouts(problem, knobs, g, metric_cfg);
      const auto bundles = score_group(rollouts, problem, metric);
      const auto adv = group_advantages(bundles, adv_cfg);
      for (const auto label : classify_conflicts(adv, bundles)) {
        if (label == ConflictLabel::FalsePositive) ++fp;
        if (label == ConflictLabel::FalseNegative) ++fn;
      }
      total += g;
    }
    ConflictPoint point;
    point.fp = static_cast<double>(fp) / static_cast<double>(total);
    point.fn = static_cast<double>(fn) / static_cast<double>(total);
    point.overall = point.fp + point.fn;
    series.batches.push_back(point);
  }
  return series;
}

struct TokenCostRow {
  std::string language;
  size_t trajectories = 0;
  long long trans_tokens = 0;
  long long total_tokens = 0;
  double mean_trans_tokens = 0.0;
  double mean_total_tokens = 0.0;
  double ratio = 0.0;  // trans_tokens / total_tokens
};

// Translation-token vs total-token accounting, one row per language tag plus
// an "all" summary row.
inline std::vector<TokenCostRow> token_cost_report(
    std::span<const Trajectory> trajectories,
    const std::map<std::string, Problem>& problems) {
  if (trajectories.empty()) throw EmptyCorpus("token_cost_report: no rollouts");
  std::map<std::string, TokenCostRow> by_lang;
  TokenCostRow all;
  all.language = "all";
  for (const auto& t : trajectories) {
    auto it = problems.find(t.problem_id);
    if (it == problems.end())
      throw InputError("token_cost_report: unknown problem_id '" +
                       t.problem_id + "'");
    const long long trans =
        t.trans_span ? static_cast<long long>(t.trans_span->size()) : 0;
    const long long total = static_cast<long long>(t.tokens.size());
    auto& row = by_lang[it->second.language_tag];
    row.language = it->second.language_tag;
    row.trajectories += 1;
    row.trans_tokens += trans;
    row.total_tokens += total;
    all.trajectories += 1;
    all.trans_tokens += trans;
    all.total_tokens += total;
  }
  auto finalize = [](TokenCostRow& row) {
    const double n = static_cast<double>(row.trajectories);
    row.mean_trans_tokens = static_cast<double>(row.trans_tokens) / n;
    row.mean_total_tokens = static_cast<double>(row.total_tokens) / n;
    row.ratio = row.total_tokens > 0
                    ? static_cast<double>(row.trans_tokens) /
                          static_cast<double>(row.total_tokens)
                    : 0.0;
  };
  std::vector<TokenCostRow> rows;
  for (auto& [_, row] : by_lang) {
    finalize(row);
    rows.push_back(row);
  }
  finalize(all);
  rows.push_back(all);
  return rows;
}

}  // namespace pivot

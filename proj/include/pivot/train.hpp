#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pivot/advantage.hpp"
#include "pivot/metrics.hpp"
#include "pivot/policy.hpp"
#include "pivot/reward.hpp"
#include "pivot/rng.hpp"
#include "pivot/simenv.hpp"
#include "pivot/surrogate.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

// Action vocabulary for the trainable cipher-math policy. The environment
// interprets abstract actions against the current problem, so a small
// problem-independent table can still produce scoreable rollouts: emit the
// open tag, copy reference words (or corrupt them), close, then commit to a
// final answer.
enum PolicyAction : int {
  kActOpen = 0,      // "<english_translation>"
  kActClose = 1,     // "</english_translation>"
  kActWordOk = 2,    // next reference word
  kActWordBad = 3,   // noise word
  kActAnswerOk = 4,  // reasoning sentence with the gold answer
  kActAnswerBad = 5, // reasoning sentence with a wrong answer
  kActEos = 6,       // stop
  kPolicyVocab = 7,
};

struct TrainEnvConfig {
  int max_len = 16;          // hard cap on sampled actions
  int corpus_size = 64;      // training problems
  int eval_rollouts = 4096;  // sampled rollouts for accuracy evaluation
  // Initial logit structure; OK/BAD variants start at the same logit except
  // the answer gap, which biases early groups toward homogeneous failure.
  double init_open_bias = 4.0;
  double init_word_bias = 1.0;
  double init_close_bias = 0.5;
  double init_answer_bias = 1.0;
  double init_answer_gap = 2.0;  // logit(ANS_BAD) - logit(ANS_OK)
  double init_eos_bias = 3.0;
  double init_other = -2.0;

  void validate() const {
    if (max_len < 4) throw ConfigError("train.max_len must be >= 4");
    if (corpus_size < 1) throw ConfigError("train.corpus_size must be >= 1");
    if (eval_rollouts < 1)
      throw ConfigError("train.eval_rollouts must be >= 1");
  }
};

// Renders sampled actions into a tagged rollout text. token_texts concatenate
// exactly to the text, one entry per action.
struct RenderedRollout {
  std::string text;
  std::vector<std::string> token_texts;
};

inline RenderedRollout render_actions(const Problem& problem,
                                      std::span<const int> actions) {
  RenderedRollout out;
  const auto ref_words = split_whitespace(
      problem.english_reference ? *problem.english_reference : std::string());
  size_t cursor = 0;
  auto wrong = [&problem] {
    try {
      return std::to_string(std::stoll(problem.gold_answer) + 1);
    } catch (...) {
      return problem.gold_answer + "0";
    }
  };
  for (size_t i = 0; i < actions.size(); ++i) {
    std::string piece;
    switch (actions[i]) {
      case kActOpen: piece = std::string(kOpenTag); break;
      case kActClose: piece = std::string(kCloseTag); break;
      case kActWordOk:
        piece = cursor < ref_words.size() ? ref_words[cursor++] : "and";
        break;
      case kActWordBad:
        piece = detail::kNoiseLexicon[i % detail::kNoiseLexicon.size()];
        break;
      case kActAnswerOk:
        piece = "The answer is \\boxed{" + problem.gold_answer + "}.";
        break;
      case kActAnswerBad:
        piece = "The answer is \\boxed{" + wrong() + "}.";
        break;
      case kActEos: piece.clear(); break;
      default: piece = "?"; break;
    }
    if (!out.text.empty() && !piece.empty()) piece = " " + piece;
    out.text += piece;
    out.token_texts.push_back(std::move(piece));
  }
  return out;
}

// Samples one on-policy rollout: actions from the policy, old_logprobs frozen
// at sampling time, spans located on the rendered text.
inline Trajectory sample_policy_rollout(const ToyPolicy& policy,
                                        const Problem& problem, Rng& rng,
                                        int max_len) {
  Trajectory t;
  t.problem_id = problem.id;
  t.tokens = sample_tokens(policy, rng, max_len, kActEos);
  t.old_logprobs = logprob(policy, t.tokens);
  auto rendered = render_actions(problem, t.tokens);
  t.text = std::move(rendered.text);
  const auto layout =
      locate_spans(rendered.token_texts, t.text, parse_trajectory(t.text));
  t.trans_span = layout.trans;
  t.reason_span = layout.reason;
  return t;
}

// Structured initial policy: the format skeleton starts nearly learned while
// word fidelity is undecided and wrong answers dominate, so early groups are
// translation-spread-heavy.
inline ToyPolicy make_train_policy(const TrainEnvConfig& env, uint64_t seed) {
  ToyPolicy p = ToyPolicy::zeros(kPolicyVocab, 1, seed);
  auto set_row = [&p](int prev, std::initializer_list<std::pair<int, double>>
                                    entries,
                      double other) {
    auto row = p.row(prev);
    for (int v = 0; v < p.vocab_size; ++v) row[v] = other;
    for (const auto& [v, logit] : entries) row[v] = logit;
  };
  const double other = env.init_other;
  set_row(p.bos(), {{kActOpen, env.init_open_bias}}, other);
  set_row(kActOpen,
          {{kActWordOk, env.init_word_bias}, {kActWordBad, env.init_word_bias}},
          other);
  set_row(kActWordOk,
          {{kActWordOk, env.init_word_bias},
           {kActWordBad, env.init_word_bias},
           {kActClose, env.init_close_bias}},
          other);
  set_row(kActWordBad,
          {{kActWordOk, env.init_word_bias},
           {kActWordBad, env.init_word_bias},
           {kActClose, env.init_close_bias}},
          other);
  set_row(kActClose,
          {{kActAnswerOk, env.init_answer_bias - env.init_answer_gap / 2},
           {kActAnswerBad, env.init_answer_bias + env.init_answer_gap / 2}},
          other);
  set_row(kActAnswerOk, {{kActEos, env.init_eos_bias}}, other);
  set_row(kActAnswerBad, {{kActEos, env.init_eos_bias}}, other);
  set_row(kActEos, {}, 0.0);
  return p;
}

struct StepMetrics {
  int step = 0;
  double objective = 0.0;
  double accuracy = 0.0;  // fraction of rollouts with reasoning reward 1
  double mean_trans_reward = 0.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double clip_fraction = 0.0;
};

// One on-policy update: sample a group per problem, score, normalize
// advantages per the configured mode, take a single gradient-ascent step on
// the clipped surrogate averaged over groups. Metrics reflect the sampled
// batch before the update.
inline StepMetrics train_step(ToyPolicy& policy,
                              std::span<const Problem> batch,
                              const MetricFn& metric,
                              const AdvantageConfig& adv_cfg,
                              const SurrogateConfig& sur_cfg,
                              const TrainEnvConfig& env, Rng& rng) {
  sur_cfg.validate();
  if (batch.empty()) throw EmptyGroup("train_step: empty problem batch");
  std::vector<double> grad(policy.theta.size(), 0.0);
  double objective = 0.0;
  long long rollouts = 0, correct = 0, conflicts_fp = 0, conflicts_fn = 0;
  double trans_sum = 0.0;
  size_t tokens_total = 0, tokens_clipped = 0;

  for (const Problem& problem : batch) {
    std::vector<Trajectory> group;
    group.reserve(sur_cfg.group_size);
    for (int j = 0; j < sur_cfg.group_size; ++j)
      group.push_back(sample_policy_rollout(policy, problem, rng, env.max_len));
    const auto bundles = score_group(group, problem, metric);
    auto adv = group_advantages(bundles, adv_cfg);
    attach_token_advantages(adv, group);
    for (const auto label : classify_conflicts(adv, bundles)) {
      if (label == ConflictLabel::FalsePositive) ++conflicts_fp;
      if (label == ConflictLabel::FalseNegative) ++conflicts_fn;
    }
    for (const auto& bundle : bundles) {
      correct += bundle.reason;
      trans_sum += bundle.trans;
      ++rollouts;
    }
    const auto result =
        surrogate_and_grad(policy, group, adv.per_token, sur_cfg);
    objective += result.objective;
    tokens_total += result.token_count;
    tokens_clipped += result.clipped_tokens;
    for (size_t k = 0; k < grad.size(); ++k) grad[k] += result.grad[k];
  }

  const double inv_groups = 1.0 / static_cast<double>(batch.size());
  for (size_t k = 0; k < grad.size(); ++k)
    policy.theta[k] += sur_cfg.learning_rate * grad[k] * inv_groups;

  StepMetrics m;
  m.objective = objective * inv_groups;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(rollouts);
  m.mean_trans_reward = trans_sum / static_cast<double>(rollouts);
  m.fp_rate = static_cast<double>(conflicts_fp) / static_cast<double>(rollouts);
  m.fn_rate = static_cast<double>(conflicts_fn) / static_cast<double>(rollouts);
  m.clip_fraction =
      tokens_total ? static_cast<double>(tokens_clipped) / tokens_total : 0.0;
  return m;
}

struct EvalStats {
  double accuracy = 0.0;
  double mean_trans_reward = 0.0;
};

// Sampled evaluation over a problem set (round-robin), isolated from the
// training RNG stream. Reports answer accuracy and the masked translation
// reward, both averaged over eval_rollouts samples.
inline EvalStats evaluate_policy(const ToyPolicy& policy,
                                 std::span<const Problem> problems,
                                 const MetricFn& metric,
                                 const TrainEnvConfig& env, uint64_t seed) {
  Rng rng(mix_seed(seed, 0xEFA1ull));
  long long correct = 0;
  double trans_sum = 0.0;
  for (int i = 0; i < env.eval_rollouts; ++i) {
    const Problem& problem = problems[i % problems.size()];
    const auto rollout =
        sample_policy_rollout(policy, problem, rng, env.max_len);
    const auto parse = parse_trajectory(rollout.text);
    correct += reasoning_reward(parse, problem);
    trans_sum += translation_reward(parse, problem, metric);
  }
  EvalStats stats;
  stats.accuracy =
      static_cast<double>(correct) / static_cast<double>(env.eval_rollouts);
  stats.mean_trans_reward =
      trans_sum / static_cast<double>(env.eval_rollouts);
  return stats;
}

}  // namespace pivot

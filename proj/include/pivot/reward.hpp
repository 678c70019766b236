#pragma once

#include <span>
#include <string>
#include <vector>

#include "pivot/answer.hpp"
#include "pivot/errors.hpp"
#include "pivot/metrics.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

// The three per-trajectory rewards. A failed format gate zeroes the other two.
struct RewardBundle {
  int format = 0;       // 1 iff the translation is cleanly tagged
  double trans = 0.0;   // metric score in [0, 1], masked by format
  int reason = 0;       // 1 iff the final boxed answer is correct and format holds

  double sum() const { return format ? trans + reason : 0.0; }
};

inline int format_reward(const ParseOutcome& parse) {
  return parse.well_formed ? 1 : 0;
}

// Metric score of the translation snippet, masked by the format gate. The
// metric is never invoked when the gate fails.
inline double translation_reward(const ParseOutcome& parse,
                                 const Problem& problem,
                                 const MetricFn& metric) {
  if (!format_reward(parse)) return 0.0;
  return metric.scorer(*parse.translation_text, problem.source_text,
                       problem.english_reference);
}

// Binary outcome reward: requires the format gate, a boxed answer in the
// reasoning segment, and exact agreement with the gold answer.
inline int reasoning_reward(const ParseOutcome& parse, const Problem& problem) {
  if (!format_reward(parse)) return 0;
  const auto extracted = extract_boxed(parse.reasoning_text);
  if (!extracted) return 0;
  return answers_equal(*extracted, problem.gold_answer) ? 1 : 0;
}

inline RewardBundle score_trajectory(const Trajectory& trajectory,
                                     const Problem& problem,
                                     const MetricFn& metric) {
  const ParseOutcome parse = parse_trajectory(trajectory.text);
  RewardBundle bundle;
  bundle.format = format_reward(parse);
  bundle.trans = translation_reward(parse, problem, metric);
  bundle.reason = reasoning_reward(parse, problem);
  return bundle;
}

// Element-wise rewards for a rollout group, order preserved. Member failures
// are rethrown with the trajectory index attached.
inline std::vector<RewardBundle> score_group(
    std::span<const Trajectory> trajectories, const Problem& problem,
    const MetricFn& metric) {
  std::vector<RewardBundle> bundles;
  bundles.reserve(trajectories.size());
  for (size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].problem_id != problem.id)
      throw InvariantError("score_group: trajectory " + std::to_string(i) +
                           " has problem_id '" + trajectories[i].problem_id +
                           "', expected '" + problem.id + "'");
    try {
      bundles.push_back(score_trajectory(trajectories[i], problem, metric));
    } catch (const InputError& e) {
      throw InputError("trajectory " + std::to_string(i) + ": " + e.what());
    }
  }
  return bundles;
}

}  // namespace pivot

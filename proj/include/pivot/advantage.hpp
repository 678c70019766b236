#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pivot/errors.hpp"
#include "pivot/reward.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

enum class AdvMode { StepLevel, TrajLevel };

inline const char* to_string(AdvMode m) {
  return m == AdvMode::StepLevel ? "step" : "traj";
}

struct AdvantageConfig {
  double alpha = 0.25;        // fusion weight on the translation stream
  double std_epsilon = 1e-6;  // below this the group is degenerate
  AdvMode mode = AdvMode::StepLevel;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0)
      throw ConfigError("advantage.alpha must lie in [0, 1]");
    if (!(std_epsilon > 0))
      throw ConfigError("advantage.std_epsilon must be > 0");
  }
};

enum class ConflictLabel { FalsePositive, FalseNegative, Consistent, Zero };

inline const char* to_string(ConflictLabel label) {
  switch (label) {
    case ConflictLabel::FalsePositive: return "false_positive";
    case ConflictLabel::FalseNegative: return "false_negative";
    case ConflictLabel::Consistent: return "consistent";
    case ConflictLabel::Zero: return "zero";
  }
  return "unknown";
}

// Per-group normalized advantages. In StepLevel mode a_trans and a_reason are
// the segment-wise z-scores and a_fused interpolates them; in TrajLevel mode
// all three hold the single broadcast advantage of the summed reward, so
// reasoning_stream() is mode-agnostic.
struct GroupAdvantages {
  AdvMode mode = AdvMode::StepLevel;
  std::vector<double> a_trans;
  std::vector<double> a_reason;
  std::vector<double> a_fused;
  std::vector<std::vector<double>> per_token;  // filled by attach_token_advantages
  size_t group_size = 0;

  std::span<const double> reasoning_stream() const { return a_reason; }
};

// Group-relative normalization with the population standard deviation.
// Degenerate groups (std below std_epsilon) map to exact zeros.
inline std::vector<double> znorm(std::span<const double> values,
                                 double std_epsilon) {
  if (values.empty()) throw EmptyGroup("znorm: empty group");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double std = std::sqrt(var);
  std::vector<double> out(values.size(), 0.0);
  if (std < std_epsilon) return out;
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / std;
  return out;
}

// Segment-decoupled credit assignment: translation and reasoning rewards are
// z-normed in separate groups, then the translation stream is pulled toward
// the reasoning outcome by the alpha interpolation.
inline GroupAdvantages step_level_advantages(
    std::span<const RewardBundle> bundles, const AdvantageConfig& cfg) {
  cfg.validate();
  if (bundles.empty()) throw EmptyGroup("step_level_advantages: empty group");
  std::vector<double> trans(bundles.size()), reason(bundles.size());
  for (size_t i = 0; i < bundles.size(); ++i) {
    trans[i] = bundles[i].trans;
    reason[i] = static_cast<double>(bundles[i].reason);
  }
  GroupAdvantages out;
  out.mode = AdvMode::StepLevel;
  out.group_size = bundles.size();
  out.a_trans = znorm(trans, cfg.std_epsilon);
  out.a_reason = znorm(reason, cfg.std_epsilon);
  out.a_fused.resize(bundles.size());
  for (size_t i = 0; i < bundles.size(); ++i)
    out.a_fused[i] = cfg.alpha * out.a_trans[i] +
                     (1.0 - cfg.alpha) * out.a_reason[i];
  return out;
}

// Summed-reward baseline: one z-normed advantage per trajectory, broadcast
// over every token position.
inline GroupAdvantages traj_level_advantages(
    std::span<const RewardBundle> bundles, const AdvantageConfig& cfg) {
  cfg.validate();
  if (bundles.empty()) throw EmptyGroup("traj_level_advantages: empty group");
  std::vector<double> sums(bundles.size());
  for (size_t i = 0; i < bundles.size(); ++i) sums[i] = bundles[i].sum();
  GroupAdvantages out;
  out.mode = AdvMode::TrajLevel;
  out.group_size = bundles.size();
  out.a_trans = znorm(sums, cfg.std_epsilon);
  out.a_reason = out.a_trans;
  out.a_fused = out.a_trans;
  return out;
}

inline GroupAdvantages group_advantages(std::span<const RewardBundle> bundles,
                                        const AdvantageConfig& cfg) {
  return cfg.mode == AdvMode::StepLevel ? step_level_advantages(bundles, cfg)
                                        : traj_level_advantages(bundles, cfg);
}

// Expands per-trajectory advantages to per-token streams. StepLevel assigns
// the fused advantage to translation-span tokens (tags included) and the
// reasoning advantage everywhere else; TrajLevel broadcasts one value.
inline void attach_token_advantages(GroupAdvantages& adv,
                                    std::span<const Trajectory> trajectories) {
  if (trajectories.size() != adv.group_size)
    throw InvariantError("attach_token_advantages: group size mismatch");
  adv.per_token.assign(adv.group_size, {});
  for (size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    std::vector<double>& row = adv.per_token[i];
    row.resize(t.tokens.size(), adv.a_reason[i]);
    if (adv.mode == AdvMode::StepLevel && t.trans_span) {
      for (size_t k = t.trans_span->begin;
           k < t.trans_span->end && k < row.size(); ++k)
        row[k] = adv.a_fused[i];
    }
  }
}

// Conflict bookkeeping on the stream that governs reasoning tokens: a
// positive advantage on an incorrect answer is a false positive, a negative
// advantage on a correct answer a false negative.
inline std::vector<ConflictLabel> classify_conflicts(
    const GroupAdvantages& adv, std::span<const RewardBundle> bundles) {
  const auto stream = adv.reasoning_stream();
  if (stream.size() != bundles.size())
    throw InvariantError("classify_conflicts: advantage/bundle length mismatch");
  std::vector<ConflictLabel> labels(bundles.size());
  for (size_t i = 0; i < bundles.size(); ++i) {
    const double a = stream[i];
    const int reason = bundles[i].reason;
    if (a > 0.0 && reason == 0)
      labels[i] = ConflictLabel::FalsePositive;
    else if (a < 0.0 && reason == 1)
      labels[i] = ConflictLabel::FalseNegative;
    else if (a == 0.0)
      labels[i] = ConflictLabel::Zero;
    else
      labels[i] = ConflictLabel::Consistent;
  }
  return labels;
}

}  // namespace pivot

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pivot/errors.hpp"
#include "pivot/policy.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

struct SurrogateConfig {
  double eps_low = 0.2;    // lower clip threshold
  double eps_high = 0.28;  // higher upper threshold lets rare tokens grow
  double learning_rate = 1e-2;
  int group_size = 8;

  void validate() const {
    if (!(eps_low > 0) || !(eps_high > 0))
      throw ConfigError("surrogate: clip thresholds must be > 0");
    if (group_size < 1) throw ConfigError("surrogate.group_size must be >= 1");
  }
};

struct SurrogateResult {
  double objective = 0.0;
  std::vector<double> grad;   // same layout as ToyPolicy::theta
  size_t token_count = 0;
  size_t clipped_tokens = 0;  // tokens where the clipped branch was active

  double clip_fraction() const {
    return token_count ? static_cast<double>(clipped_tokens) / token_count : 0.0;
  }
};

// Clipped token-level surrogate for one rollout group:
//
//   (1 / sum_i |o_i|) * sum_i sum_t min(r * A, clip(r, 1-eps_l, 1+eps_h) * A)
//
// with r = exp(logprob - old_logprob). The gradient is exact: it flows
// through r wherever the unclipped branch is the active min (ties included)
// and is zero where the clipped constant wins. No KL term.
inline SurrogateResult surrogate_and_grad(
    const ToyPolicy& policy, std::span<const Trajectory> group,
    std::span<const std::vector<double>> per_token_advantages,
    const SurrogateConfig& cfg) {
  cfg.validate();
  if (group.empty()) throw EmptyGroup("surrogate_and_grad: empty group");
  if (per_token_advantages.size() != group.size())
    throw InvariantError("surrogate_and_grad: advantage rows != group size");

  SurrogateResult result;
  result.grad.assign(policy.theta.size(), 0.0);
  for (const Trajectory& t : group) result.token_count += t.tokens.size();
  if (result.token_count == 0) return result;
  const double inv_tokens = 1.0 / static_cast<double>(result.token_count);

  const double lo = 1.0 - cfg.eps_low;
  const double hi = 1.0 + cfg.eps_high;

  for (size_t i = 0; i < group.size(); ++i) {
    const Trajectory& traj = group[i];
    const auto& adv = per_token_advantages[i];
    if (adv.size() != traj.tokens.size() ||
        traj.old_logprobs.size() != traj.tokens.size())
      throw InvariantError("surrogate_and_grad: per-token array mismatch at " +
                           std::to_string(i));
    const auto lp = logprob(policy, traj.tokens);
    for (size_t t = 0; t < traj.tokens.size(); ++t) {
      const double a = adv[t];
      const double r = std::exp(lp[t] - traj.old_logprobs[t]);
      const double clipped = std::clamp(r, lo, hi);
      const double unclipped_term = r * a;
      const double clipped_term = clipped * a;
      if (unclipped_term <= clipped_term) {
        // Unclipped branch active: d(term)/d(logit) = a * r * dlogpi/dlogit.
        result.objective += unclipped_term * inv_tokens;
        const double coeff = a * r * inv_tokens;
        if (coeff != 0.0) {
          const int ctx = policy.context_id(traj.tokens, t);
          const auto probs = softmax(policy.row(ctx));
          auto grad_row = std::span<double>(result.grad)
                              .subspan(static_cast<size_t>(ctx) *
                                           policy.vocab_size,
                                       policy.vocab_size);
          for (int v = 0; v < policy.vocab_size; ++v)
            grad_row[v] -= coeff * probs[v];
          grad_row[traj.tokens[t]] += coeff;
        }
      } else {
        // Clipped constant wins the min: zero gradient through this token.
        result.objective += clipped_term * inv_tokens;
        ++result.clipped_tokens;
      }
    }
  }
  return result;
}

}  // namespace pivot
